"""Command-line pipeline: synth / ingest / label / featurize / train / eval / predict.

Every run resolves one configuration (defaults < --config file < --set
overrides < explicit flags), validates it before any work, and writes a
manifest next to its primary output recording the tool version, the resolved
configuration hash, and content hashes of inputs and outputs.  Reruns that
would reproduce an existing manifest are skipped; conflicting reruns fail
unless --force is given.

Exit codes: 0 success, 2 validation error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import date

import numpy as np

from . import __version__
from .embeddings import load_embeddings
from .errors import DataError, NumericError, ValidationError
from .evaluation import (
    cross_validate,
    evaluate_holdout,
    permutation_baseline,
    render_report,
    summarize,
)
from .features import (
    BLOCK_ORDER,
    FeatureExtractor,
    read_features_csv,
    stack_features,
    write_features_csv,
)
from .labeling import (
    TARGET_CODES,
    TARGETS,
    label_cohort,
    read_labels_csv,
    read_survey_csv,
    score_survey,
    write_labels_csv,
    write_thresholds_json,
)
from .models import (
    AugmentedHeadClassifier,
    FeedForwardClassifier,
    RBFKernelSVM,
    SoftmaxRegression,
    TrainedModel,
    load_model,
    save_model,
)
from .preprocessing import Standardizer
from .records import (
    ActivityFilterPolicy,
    apply_activity_filter,
    dataset_summary,
    ingest_dataset,
    load_users,
    save_users,
)
from .resources import load_emotion_lexicon, load_word_vectors
from .synth import SynthConfig, generate_cohort, write_dataset

DEFAULT_CONFIG: dict = {
    "paths": {
        "posts": None,
        "profiles": None,
        "users": None,
        "survey": None,
        "labels": None,
        "features": None,
        "word_vectors": None,
        "lexicon": None,
        "embeddings": None,
        "model": None,
        "out_dir": "out",
    },
    "filter": {
        "min_posts": 20,
        "min_active_months": 2,
        "latest_post_not_before": "2020-01-01",
        "months_mode": "calendar",
    },
    "features": {"blocks": ["basic", "dynamic"]},
    "model": {
        "type": "lr",
        "C": 1.0,
        "gamma": "scale",
        "svm_tol": 1e-3,
        "max_passes": 500,
        "lr_tol": 1e-6,
        "max_iter": 1000,
        "hidden": [128, 64, 32],
        "learning_rate": 1e-3,
        "epochs": 200,
        "batch_size": 32,
        "val_fraction": 0.1,
        "patience": 20,
    },
    "eval": {
        "protocol": "cv",
        "k": 5,
        "test_fraction": 0.2,
        "targets": list(TARGETS),
        "models": ["lr", "svm", "nn"],
        "feature_sets": [["basic", "dynamic"], ["basic", "dynamic", "content"]],
        "include_aug": False,
        "permutation_shuffles": 0,
    },
    "synth": {"n_users": 320, "signal": "behavior", "strength": 1.0},
    "target": "social_exclusion",
    "seed": 42,
    "jobs": 0,
    "format": "both",
}

MODEL_TYPES = ("lr", "svm", "nn", "aug")


# --- configuration plumbing ---

def _deep_update(base: dict, extra: dict) -> dict:
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def _apply_set(config: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ValidationError(f"--set expects dotted.path=value, got {assignment!r}")
    path, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    parts = path.split(".")
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ValidationError(f"unknown config section {path!r}")
        node = node[part]
    if parts[-1] not in node:
        raise ValidationError(f"unknown config key {path!r}")
    node[parts[-1]] = value


def resolve_config(args: argparse.Namespace) -> dict:
    config = copy.deepcopy(DEFAULT_CONFIG)
    if args.config:
        if not os.path.exists(args.config):
            raise ValidationError(f"config file {args.config} does not exist")
        with open(args.config, encoding="utf-8") as fh:
            try:
                _deep_update(config, json.load(fh))
            except json.JSONDecodeError as exc:
                raise ValidationError(f"bad config JSON: {exc}") from exc
    for assignment in args.set or []:
        _apply_set(config, assignment)
    for key, path_key in _PATH_FLAGS.items():
        value = getattr(args, key, None)
        if value is not None:
            config["paths"][path_key] = value
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    if getattr(args, "jobs", None) is not None:
        config["jobs"] = args.jobs
    if getattr(args, "format", None) is not None:
        config["format"] = args.format
    if getattr(args, "blocks", None) is not None:
        config["features"]["blocks"] = args.blocks.split(",")
    if getattr(args, "model_type", None) is not None:
        config["model"]["type"] = args.model_type
    if getattr(args, "target", None) is not None:
        config["target"] = args.target
    if getattr(args, "k", None) is not None:
        config["eval"]["k"] = args.k
    if getattr(args, "protocol", None) is not None:
        config["eval"]["protocol"] = args.protocol
    if getattr(args, "models", None) is not None:
        config["eval"]["models"] = args.models.split(",")
    if getattr(args, "include_aug", False):
        config["eval"]["include_aug"] = True
    if getattr(args, "signal", None) is not None:
        config["synth"]["signal"] = args.signal
    if getattr(args, "n_users", None) is not None:
        config["synth"]["n_users"] = args.n_users
    return config


_PATH_FLAGS = {
    "posts": "posts",
    "profiles": "profiles",
    "users": "users",
    "survey": "survey",
    "labels": "labels",
    "features": "features",
    "word_vectors": "word_vectors",
    "lexicon": "lexicon",
    "embeddings": "embeddings",
    "model_path": "model",
    "out_dir": "out_dir",
}


def _normalize_target(name: str) -> str:
    reverse = {code: target for target, code in TARGET_CODES.items()}
    if name in TARGETS:
        return name
    if name in reverse:
        return reverse[name]
    raise ValidationError(
        f"unknown target {name!r}; use one of {', '.join(TARGETS)} or se/mh/gi"
    )


def _require_path(config: dict, key: str, producer: str) -> str:
    path = config["paths"].get(key)
    if not path:
        raise ValidationError(
            f"paths.{key} is required (produce it with `cyberagg {producer}` "
            f"or pass --{key.replace('_', '-')})"
        )
    if not os.path.exists(path):
        raise DataError(
            f"{path} does not exist; run `cyberagg {producer}` first"
        )
    return path


# --- manifest handling ---

def _sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _run_hash(command: str, config: dict, inputs: dict[str, str]) -> str:
    payload = json.dumps(
        {"tool": "cyberagg", "version": __version__, "command": command,
         "config": config, "inputs": inputs},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ManifestGuard:
    """Write-once bookkeeping around one command's outputs."""

    def __init__(self, command: str, config: dict, primary_output: str,
                 input_paths: dict[str, str], force: bool):
        self.command = command
        self.config = config
        self.manifest_path = primary_output + ".manifest.json"
        self.input_hashes = {
            name: _sha256_file(path) for name, path in sorted(input_paths.items())
        }
        self.run_hash = _run_hash(command, config, self.input_hashes)
        self.force = force

    def should_skip(self) -> bool:
        if not os.path.exists(self.manifest_path):
            return False
        with open(self.manifest_path, encoding="utf-8") as fh:
            try:
                existing = json.load(fh)
            except json.JSONDecodeError:
                return False
        if existing.get("run_hash") != self.run_hash:
            if not self.force:
                raise ValidationError(
                    f"{self.manifest_path} records a different run; "
                    "pass --force to overwrite"
                )
            return False
        outputs = existing.get("outputs", {})
        return all(os.path.exists(p) for p in outputs)

    def write(self, output_paths: dict[str, str]) -> None:
        manifest = {
            "tool": "cyberagg",
            "version": __version__,
            "command": self.command,
            "run_hash": self.run_hash,
            "config": self.config,
            "inputs": self.input_hashes,
            "outputs": {path: _sha256_file(path) for path in sorted(output_paths.values())},
        }
        with open(self.manifest_path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


# --- model factories ---

def make_estimator(model_type: str, model_cfg: dict, seed: int, behavior_dim: int = 134,
                   provenance: str = ""):
    if model_type == "lr":
        return SoftmaxRegression(
            C=model_cfg["C"], tol=model_cfg["lr_tol"], max_iter=model_cfg["max_iter"]
        )
    if model_type == "svm":
        return RBFKernelSVM(
            C=model_cfg["C"], gamma=model_cfg["gamma"], tol=model_cfg["svm_tol"],
            max_passes=model_cfg["max_passes"],
        )
    if model_type == "nn":
        return FeedForwardClassifier(
            hidden=tuple(model_cfg["hidden"]),
            learning_rate=model_cfg["learning_rate"],
            epochs=model_cfg["epochs"],
            batch_size=model_cfg["batch_size"],
            val_fraction=model_cfg["val_fraction"],
            patience=model_cfg["patience"],
            seed=seed,
        )
    if model_type == "aug":
        return AugmentedHeadClassifier(
            embedding_dim=512,
            behavior_dim=behavior_dim,
            provenance=provenance,
            hidden=tuple(model_cfg["hidden"]),
            learning_rate=model_cfg["learning_rate"],
            epochs=model_cfg["epochs"],
            batch_size=model_cfg["batch_size"],
            val_fraction=model_cfg["val_fraction"],
            patience=model_cfg["patience"],
            seed=seed,
        )
    raise ValidationError(f"unknown model type {model_type!r}")


def _blocks_for_model(model_type: str, blocks: tuple[str, ...]) -> tuple[str, ...]:
    if model_type == "aug":
        return ("basic", "dynamic", "transformer")
    return tuple(b for b in BLOCK_ORDER if b in blocks)


# --- commands ---

def cmd_synth(config: dict, force: bool) -> int:
    out_dir = config["paths"]["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    synth_cfg = SynthConfig(
        n_users=config["synth"]["n_users"],
        seed=config["seed"],
        signal=config["synth"]["signal"],
        strength=config["synth"]["strength"],
    )
    guard = ManifestGuard("synth", config, os.path.join(out_dir, "posts.jsonl"), {}, force)
    if guard.should_skip():
        print(f"synth: outputs up to date in {out_dir} (manifest match)")
        return 0
    dataset = generate_cohort(synth_cfg)
    paths = write_dataset(dataset, out_dir)
    guard.write(paths)
    print(
        f"synth: wrote {len(dataset.profile_lines)} users, "
        f"{len(dataset.post_lines)} posts to {out_dir} "
        f"(signal={synth_cfg.signal})"
    )
    return 0


def cmd_ingest(config: dict, force: bool) -> int:
    posts_path = _require_path(config, "posts", "synth")
    profiles_path = _require_path(config, "profiles", "synth")
    out_dir = config["paths"]["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    users_path = os.path.join(out_dir, "users.jsonl")
    guard = ManifestGuard(
        "ingest", config, users_path,
        {"posts": posts_path, "profiles": profiles_path}, force,
    )
    if guard.should_skip():
        print(f"ingest: {users_path} up to date (manifest match)")
        return 0

    with open(profiles_path, encoding="utf-8") as prof_fh, \
            open(posts_path, encoding="utf-8") as post_fh:
        users, report = ingest_dataset(post_fh, prof_fh)

    policy = ActivityFilterPolicy(
        min_posts=config["filter"]["min_posts"],
        min_active_calendar_months=config["filter"]["min_active_months"],
        latest_post_not_before=date.fromisoformat(
            config["filter"]["latest_post_not_before"]
        ),
        months_mode=config["filter"]["months_mode"],
    )
    kept, dropped_users = apply_activity_filter(users, policy)
    kept.sort(key=lambda u: u.user_id)
    summary = dataset_summary(kept)

    save_users(kept, users_path)
    report_json = os.path.join(out_dir, "ingest_report.json")
    report_txt = os.path.join(out_dir, "ingest_report.txt")
    payload = report.to_dict()
    payload["activity_filter"] = {
        "kept": len(kept),
        "dropped": [{"user_id": uid, "reason": reason} for uid, reason in dropped_users],
    }
    payload["summary"] = summary.to_dict()
    with open(report_json, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(report_txt, "w", encoding="utf-8") as fh:
        fh.write(report.to_text())
        fh.write(
            f"  activity filter: kept {len(kept)}, dropped {len(dropped_users)}\n"
        )
    guard.write({"users": users_path, "report_json": report_json, "report_txt": report_txt})
    print(
        f"ingest: {report.users} users read, {len(kept)} kept after activity filter "
        f"-> {users_path}"
    )
    return 0


def cmd_label(config: dict, force: bool) -> int:
    survey_path = _require_path(config, "survey", "synth")
    out_dir = config["paths"]["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    labels_path = os.path.join(out_dir, "labels.csv")
    guard = ManifestGuard("label", config, labels_path, {"survey": survey_path}, force)
    if guard.should_skip():
        print(f"label: {labels_path} up to date (manifest match)")
        return 0
    responses = read_survey_csv(survey_path)
    if len(responses) < 2:
        raise DataError("need at least 2 survey responses to fit thresholds")
    scored = [(r.user_id, score_survey(r)) for r in responses]
    thresholds, label_sets, counts = label_cohort(scored)
    write_labels_csv(label_sets, labels_path)
    thresholds_path = os.path.join(out_dir, "thresholds.json")
    write_thresholds_json(thresholds, thresholds_path)
    guard.write({"labels": labels_path, "thresholds": thresholds_path})
    for target in TARGETS:
        c = counts[target]
        th = thresholds[target]
        print(
            f"label: {target}: lo={th.lo:.4f} hi={th.hi:.4f} "
            f"high={c['high']} neutral={c['neutral']} low={c['low']}"
        )
    print(f"label: wrote {labels_path}")
    return 0


def cmd_featurize(config: dict, force: bool) -> int:
    users_path = _require_path(config, "users", "ingest")
    out_dir = config["paths"]["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    blocks = tuple(b for b in BLOCK_ORDER if b in config["features"]["blocks"])
    unknown = set(config["features"]["blocks"]) - set(BLOCK_ORDER)
    if unknown:
        raise ValidationError(f"unknown feature blocks {sorted(unknown)}")
    inputs = {"users": users_path}

    word_vectors = None
    if "content" in blocks:
        wv_path = _require_path(config, "word_vectors", "synth")
        word_vectors = load_word_vectors(wv_path)
        inputs["word_vectors"] = wv_path
    lexicon = None
    if "emotion" in blocks:
        lex_path = _require_path(config, "lexicon", "synth")
        lexicon = load_emotion_lexicon(lex_path)
        inputs["lexicon"] = lex_path
    embeddings = None
    if "transformer" in blocks:
        emb_path = _require_path(config, "embeddings", "synth")
        embeddings = load_embeddings(emb_path)
        inputs["embeddings"] = emb_path

    features_path = os.path.join(out_dir, "features.csv")
    guard = ManifestGuard("featurize", config, features_path, inputs, force)
    if guard.should_skip():
        print(f"featurize: {features_path} up to date (manifest match)")
        return 0

    users = load_users(users_path)
    users.sort(key=lambda u: u.user_id)
    if embeddings is not None:
        missing = [u.user_id for u in users if u.user_id not in embeddings]
        if missing:
            raise DataError(
                f"{len(missing)} users missing embeddings: {', '.join(missing[:5])}"
                + ("..." if len(missing) > 5 else "")
            )
    extractor = FeatureExtractor(
        blocks=blocks, word_vectors=word_vectors, lexicon=lexicon, embeddings=embeddings
    )
    jobs = config["jobs"] or os.cpu_count() or 1
    if jobs > 1 and len(users) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            vectors = list(pool.map(extractor.extract, users))
    else:
        vectors = [extractor.extract(u) for u in users]
    write_features_csv(vectors, features_path)
    guard.write({
        "features": features_path,
        "schema": features_path + ".schema.json",
    })
    print(
        f"featurize: {len(vectors)} users x {vectors[0].width} dims "
        f"({'+'.join(blocks)}) -> {features_path}"
    )
    return 0


def _load_xy(config: dict, blocks: tuple[str, ...], target: str):
    features_path = _require_path(config, "features", "featurize")
    labels_path = _require_path(config, "labels", "label")
    features = read_features_csv(features_path)
    label_sets = read_labels_csv(labels_path)
    label_by_user = {ls.user_id: ls.labels for ls in label_sets}
    missing = [fv.user_id for fv in features if fv.user_id not in label_by_user]
    if missing:
        raise DataError(
            f"{len(missing)} featurized users have no label row: "
            + ", ".join(missing[:5]) + ("..." if len(missing) > 5 else "")
        )
    features.sort(key=lambda fv: fv.user_id)
    ids, X = stack_features(features, blocks)
    y = np.array([label_by_user[uid][target] for uid in ids], dtype=np.int64)
    return ids, X, y, {"features": features_path, "labels": labels_path}


def cmd_train(config: dict, force: bool) -> int:
    model_type = config["model"]["type"]
    if model_type not in MODEL_TYPES:
        raise ValidationError(f"model.type must be one of {MODEL_TYPES}")
    target = _normalize_target(config["target"])
    blocks = _blocks_for_model(model_type, tuple(config["features"]["blocks"]))
    if model_type == "aug" and not config["paths"].get("features"):
        raise ValidationError(
            "aug model needs features including the transformer block; "
            "run featurize with --blocks basic,dynamic,transformer"
        )
    ids, X, y, inputs = _load_xy(config, blocks, target)

    out_dir = config["paths"]["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    model_path = config["paths"].get("model") or os.path.join(
        out_dir, f"model_{model_type}_{TARGET_CODES[target]}.bin"
    )
    guard = ManifestGuard("train", config, model_path, inputs, force)
    if guard.should_skip():
        print(f"train: {model_path} up to date (manifest match)")
        return 0

    provenance = ""
    if model_type == "aug" and config["paths"].get("embeddings"):
        provenance = load_embeddings(config["paths"]["embeddings"]).provenance
    scaler = Standardizer().fit(X)
    estimator = make_estimator(
        model_type, config["model"], config["seed"],
        behavior_dim=X.shape[1] - 512 if model_type == "aug" else 134,
        provenance=provenance,
    )
    estimator.fit(scaler.transform(X), y)
    trained = TrainedModel(
        model_type=model_type,
        estimator=estimator,
        standardizer=scaler,
        target=target,
        blocks=blocks,
        seed=config["seed"],
        metadata={"n_train": len(ids), "embedding_provenance": provenance},
    )
    save_model(trained, model_path)
    guard.write({"model": model_path})
    print(f"train: {model_type} on {len(ids)} users ({'+'.join(blocks)}) -> {model_path}")
    return 0


def cmd_eval(config: dict, force: bool) -> int:
    eval_cfg = config["eval"]
    out_dir = config["paths"]["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    report_json_path = os.path.join(out_dir, "report.json")
    targets = [_normalize_target(t) for t in eval_cfg["targets"]]
    model_types = list(eval_cfg["models"])
    for mt in model_types:
        if mt not in MODEL_TYPES:
            raise ValidationError(f"unknown model type {mt!r} in eval.models")
    feature_sets = [tuple(fs) for fs in eval_cfg["feature_sets"]]
    include_aug = eval_cfg["include_aug"] or "aug" in model_types
    model_types = [mt for mt in model_types if mt != "aug"]

    runs: list[tuple[str, tuple[str, ...], str]] = []
    for target in targets:
        for fs in feature_sets:
            for mt in model_types:
                runs.append((target, fs, mt))
        if include_aug:
            runs.append((target, ("basic", "dynamic", "transformer"), "aug"))

    inputs: dict[str, str] = {}
    reports = []
    for target, blocks, model_type in runs:
        ids, X, y, run_inputs = _load_xy(config, blocks, target)
        inputs.update(run_inputs)
        factory = lambda mt=model_type, d=X.shape[1]: make_estimator(  # noqa: E731
            mt, config["model"], config["seed"],
            behavior_dim=d - 512 if mt == "aug" else 134,
        )
        if eval_cfg["protocol"] == "cv":
            result = cross_validate(
                X, y, factory, k=eval_cfg["k"], seed=config["seed"], ids=ids
            )
        elif eval_cfg["protocol"] == "holdout":
            result = evaluate_holdout(
                X, y, factory, test_fraction=eval_cfg["test_fraction"],
                seed=config["seed"], ids=ids,
            )
        else:
            raise ValidationError("eval.protocol must be 'cv' or 'holdout'")
        reports.append(summarize(result, target, blocks, model_type))

    guard = ManifestGuard("eval", config, report_json_path, inputs, force)
    if guard.should_skip():
        print(f"eval: {report_json_path} up to date (manifest match)")
        return 0

    text, payload = render_report(reports)
    if eval_cfg["permutation_shuffles"] > 0:
        target = targets[0]
        blocks = feature_sets[0]
        ids, X, y, _ = _load_xy(config, blocks, target)
        factory = lambda: make_estimator(  # noqa: E731
            model_types[0] if model_types else "lr", config["model"], config["seed"]
        )
        payload["permutation_baseline"] = permutation_baseline(
            X, y, factory, eval_cfg["permutation_shuffles"],
            k=eval_cfg["k"], seed=config["seed"],
        )

    outputs = {}
    if config["format"] in ("json", "both"):
        with open(report_json_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        outputs["report_json"] = report_json_path
    if config["format"] in ("text", "both"):
        report_txt_path = os.path.join(out_dir, "report.txt")
        with open(report_txt_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        outputs["report_txt"] = report_txt_path
    guard.write(outputs)
    sys.stdout.write(text)
    print(f"eval: wrote {', '.join(sorted(outputs.values()))}")
    return 0


def cmd_predict(config: dict, force: bool) -> int:
    model_path = _require_path(config, "model", "train")
    trained = load_model(model_path)
    features_path = _require_path(config, "features", "featurize")
    features = read_features_csv(features_path)
    features.sort(key=lambda fv: fv.user_id)
    ids, X = stack_features(features, trained.blocks)

    out_dir = config["paths"]["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    predictions_path = os.path.join(out_dir, "predictions.csv")
    guard = ManifestGuard(
        "predict", config, predictions_path,
        {"model": model_path, "features": features_path}, force,
    )
    if guard.should_skip():
        print(f"predict: {predictions_path} up to date (manifest match)")
        return 0

    proba = trained.predict_proba(X)
    preds = trained.predict(X)
    target_code = TARGET_CODES.get(trained.target, trained.target or "label")
    with open(predictions_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"user_id,{target_code}_pred,p_low,p_neutral,p_high\n")
        for uid, pred, row in zip(ids, preds, proba):
            fh.write(f"{uid},{int(pred)}," + ",".join(f"{p:.6f}" for p in row) + "\n")
    guard.write({"predictions": predictions_path})
    print(f"predict: {len(ids)} rows -> {predictions_path}")
    return 0


# --- argument parsing ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyberagg",
        description="Predict indirect-aggression levels from social-media activity logs.",
    )
    parser.add_argument("--version", action="version", version=f"cyberagg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config value by dotted path")
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int, help="parallel workers (0 = logical cores)")
        p.add_argument("--force", action="store_true",
                       help="overwrite outputs recorded by a different manifest")
        p.add_argument("--out-dir", dest="out_dir")

    p = sub.add_parser("synth", help="generate a seeded synthetic cohort")
    common(p)
    p.add_argument("--n-users", type=int, dest="n_users")
    p.add_argument("--signal", choices=["behavior", "embedding", "both", "none"])

    p = sub.add_parser("ingest", help="join post/profile streams and filter active users")
    common(p)
    p.add_argument("--posts")
    p.add_argument("--profiles")

    p = sub.add_parser("label", help="score surveys and trisect the cohort")
    common(p)
    p.add_argument("--survey")

    p = sub.add_parser("featurize", help="extract feature blocks per user")
    common(p)
    p.add_argument("--users")
    p.add_argument("--blocks", help="comma-separated block list")
    p.add_argument("--word-vectors", dest="word_vectors")
    p.add_argument("--lexicon")
    p.add_argument("--embeddings")

    p = sub.add_parser("train", help="fit one model on all labeled users")
    common(p)
    p.add_argument("--features")
    p.add_argument("--labels")
    p.add_argument("--model", dest="model_type", choices=list(MODEL_TYPES))
    p.add_argument("--target")
    p.add_argument("--blocks", help="comma-separated block list")
    p.add_argument("--embeddings")
    p.add_argument("--model-out", dest="model_path")

    p = sub.add_parser("eval", help="cross-validate the model grid and render the report")
    common(p)
    p.add_argument("--features")
    p.add_argument("--labels")
    p.add_argument("--models", help="comma-separated model list (lr,svm,nn,aug)")
    p.add_argument("--include-aug", action="store_true", dest="include_aug")
    p.add_argument("--k", type=int)
    p.add_argument("--protocol", choices=["cv", "holdout"])
    p.add_argument("--format", choices=["text", "json", "both"])

    p = sub.add_parser("predict", help="apply a trained model to featurized users")
    common(p)
    p.add_argument("--model-path", dest="model_path")
    p.add_argument("--features")

    return parser


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "label": cmd_label,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        if args.command == "train" and config["model"]["type"] == "aug":
            blocks = tuple(config["features"]["blocks"])
            if "transformer" not in blocks and not config["paths"].get("features"):
                raise ValidationError(
                    "aug model requires the transformer block; featurize with "
                    "--blocks basic,dynamic,transformer --embeddings FILE"
                )
        return COMMANDS[args.command](config, force=args.force)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Predict social-media users' indirect-aggression levels from activity logs.

The pipeline runs in stages: ingest activity logs, score and trisect survey
responses into high/neutral/low labels, extract behavior/content/emotion
feature blocks, train classifiers (optionally over externally produced user
embeddings), and evaluate them with pooled stratified cross-validation.
"""

__version__ = "0.1.0"

from .embeddings import EmbeddingTable, join_embeddings, load_embeddings, save_embeddings
from .errors import CyberaggError, DataError, NumericError, ValidationError
from .evaluation import (
    EvalReport,
    cross_validate,
    evaluate_holdout,
    permutation_baseline,
    render_report,
    stratified_folds,
    summarize,
)
from .features import (
    BASIC_FEATURE_NAMES,
    BLOCK_ORDER,
    BLOCK_WIDTHS,
    FeatureExtractor,
    FeatureVector,
    assemble,
    extract_basic,
    extract_content,
    extract_dynamic,
    extract_emotion,
)
from .labeling import (
    AggressionScores,
    LabelSet,
    SurveyResponse,
    TrisectionThresholds,
    assign_label,
    fit_thresholds,
    label_cohort,
    score_survey,
)
from .metrics import ConfusionMatrix, accuracy, binary_auc, macro_f1, ovr_auc
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
    IngestReport,
    Post,
    Profile,
    UserRecord,
    apply_activity_filter,
    dataset_summary,
    ingest_dataset,
    load_users,
    save_users,
)
from .resources import EmotionLexicon, WordVectorTable, load_emotion_lexicon, load_word_vectors

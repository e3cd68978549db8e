import { readFileSync } from 'node:fs';

export interface UserPosts {
  userId: string;
  texts: string[];
}

/**
 * Read the line-delimited user records produced by the ingest stage:
 * one JSON object per line with profile.user_id and posts[].text.
 */
export function readUsers(path: string): UserPosts[] {
  const users: UserPosts[] = [];
  const seen = new Set<string>();
  const lines = readFileSync(path, 'utf8').split('\n');
  lines.forEach((line, index) => {
    if (!line.trim()) return;
    let record: any;
    try {
      record = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${index + 1}: bad JSON: ${(err as Error).message}`);
    }
    const userId = record?.profile?.user_id;
    if (typeof userId !== 'string' || !userId) {
      throw new Error(`${path}:${index + 1}: missing profile.user_id`);
    }
    if (seen.has(userId)) {
      throw new Error(`${path}:${index + 1}: duplicate user_id ${userId}`);
    }
    seen.add(userId);
    const posts = Array.isArray(record.posts) ? record.posts : [];
    const texts = posts.map((post: any, postIndex: number) => {
      if (typeof post?.text !== 'string') {
        throw new Error(`${path}:${index + 1}: post ${postIndex} has no text`);
      }
      return post.text as string;
    });
    users.push({ userId, texts });
  });
  return users;
}

/**
 * JSON shapes exchanged with the topicloop service.
 *
 * These mirror the server's responses; the recorded fixtures under
 * test/fixtures keep them honest.
 */

export interface CorpusRecord {
  id: string;
  text: string;
  category?: string;
}

export interface CorpusCreated {
  corpus_id: string;
  n_docs: number;
  n_terms: number;
  n_tokens: number;
}

export interface CorpusSummary extends CorpusCreated {
  categories: string[];
}

export interface ModelRequest {
  corpus_id: string;
  hyper: Record<string, number>;
  priors: Record<string, string[]>;
  note?: string;
}

export interface ModelCreated {
  tree_id: string;
  corpus_id: string;
  root: number;
  warnings: string[];
}

export interface TreeNode {
  id: number;
  parent: number | null;
  children: number[];
  created_at: string;
  note: string;
  edge_types: string[];
}

export interface Job {
  job_id: string;
  tree_id: string;
  phase: 'train' | 'apply';
  status: 'running' | 'done' | 'failed';
  done_iters: number;
  total_iters: number;
  node_id: number | null;
  error: string | null;
  started_at: number;
}

export interface TreeView {
  tree_id: string;
  embedding_path: string | null;
  job: Job | null;
  nodes: TreeNode[];
}

/** The immediate acknowledgment of a train or apply submission. */
export interface JobTicket {
  job_id: string;
  status: string;
  node_id?: number;
  error?: string;
}

export type WordWeight = [string, number];

export interface TopicSummary {
  topic: number;
  label: string;
  weight: number;
  words: WordWeight[];
}

export interface TopicDoc {
  doc: number;
  doc_id: string;
  text: string;
  weight: number;
}

export interface Suggestion {
  word: string;
  score: number;
  cosine: number;
}

export interface TopicDetail extends TopicSummary {
  docs: TopicDoc[];
  suggestions: Suggestion[];
}

export interface MapPoint {
  topic: number;
  x: number;
  y: number;
  weight: number;
}

export type Refinement =
  | { type: 'add_word'; topic: number; word: string }
  | { type: 'remove_word'; topic: number; word: string }
  | { type: 'swap_order'; topic: number; higher: string; lower: string }
  | { type: 'remove_doc'; topic: number; doc: number }
  | { type: 'merge_topics'; keep: number; absorb: number }
  | { type: 'split_topic'; topic: number; seed_words: string[] };

/** Edge histories also carry plain-resampling markers, not just refinements. */
export type HistoryRecord = Refinement | { type: 'train'; iters: number };

export interface PendingList {
  pending: Refinement[];
}

export interface UndoResult {
  undone: Refinement | null;
  pending: Refinement[];
}

export interface CompareEntry {
  node_id: number;
  topics: { topic: number; words: WordWeight[] }[];
}

export interface ExpandResult {
  words: string[];
}

/** One-line human description of a refinement, used by several panels. */
export function describeRefinement(ref: HistoryRecord): string {
  switch (ref.type) {
    case 'add_word':
      return `add "${ref.word}" to topic ${ref.topic}`;
    case 'remove_word':
      return `remove "${ref.word}" from topic ${ref.topic}`;
    case 'swap_order':
      return `raise "${ref.lower}" above "${ref.higher}" in topic ${ref.topic}`;
    case 'remove_doc':
      return `remove document ${ref.doc} from topic ${ref.topic}`;
    case 'merge_topics':
      return `merge topic ${ref.absorb} into topic ${ref.keep}`;
    case 'split_topic':
      return `split ${ref.seed_words.join(', ')} out of topic ${ref.topic}`;
    case 'train':
      return `resampled for ${ref.iters} sweeps`;
  }
}

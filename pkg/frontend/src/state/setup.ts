/**
 * State behind the setup window: corpus upload, concept-list curation via
 * query expansion, and model creation.
 *
 * Concept lists are drafts held client-side until "apply" posts them as
 * the model's priors. Leaving every list empty creates an unconstrained
 * model, so curation is strictly optional.
 */
import { ApiClient, ApiError } from '../api/client.js';
import { pollJob } from '../api/poll.js';
import type { CorpusCreated, CorpusRecord, Job, ModelCreated } from '../api/types.js';
import { Observable } from './observable.js';

export type SetupPhase = 'editing' | 'creating' | 'training' | 'ready';

export interface SetupState {
  corpus: CorpusCreated | null;
  query: string;
  candidates: string[];
  conceptLists: string[][];
  targetTopic: number;
  kInit: number;
  trainIters: number;
  seed: number;
  phase: SetupPhase;
  job: Job | null;
  created: ModelCreated | null;
  trainedNode: number | null;
  warnings: string[];
  error: string | null;
}

export interface SetupOptions {
  pollIntervalMs?: number;
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

/** Parse a JSON-lines corpus paste into upload records. */
export function parseRecords(text: string): CorpusRecord[] {
  const records: CorpusRecord[] = [];
  const lines = text.split('\n');
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch {
      throw new Error(`line ${i + 1} is not valid JSON`);
    }
    const rec = parsed as Partial<CorpusRecord>;
    if (typeof rec.id !== 'string' || typeof rec.text !== 'string') {
      throw new Error(`line ${i + 1} needs string "id" and "text" fields`);
    }
    records.push(rec as CorpusRecord);
  }
  if (records.length === 0) {
    throw new Error('no records found');
  }
  return records;
}

export class SetupStore extends Observable<SetupState> {
  private readonly pollIntervalMs: number;

  constructor(
    private readonly client: ApiClient,
    options: SetupOptions = {},
  ) {
    super({
      corpus: null,
      query: '',
      candidates: [],
      conceptLists: [[]],
      targetTopic: 0,
      kInit: 10,
      trainIters: 200,
      seed: 0,
      phase: 'editing',
      job: null,
      created: null,
      trainedNode: null,
      warnings: [],
      error: null,
    });
    this.pollIntervalMs = options.pollIntervalMs ?? 1000;
  }

  setQuery(query: string): void {
    this.set({ query });
  }

  setHyper(patch: Partial<Pick<SetupState, 'kInit' | 'trainIters' | 'seed'>>): void {
    this.set(patch);
  }

  setTargetTopic(index: number): void {
    if (index >= 0 && index < this.state.conceptLists.length) {
      this.set({ targetTopic: index });
    }
  }

  addConceptList(): void {
    this.set({
      conceptLists: [...this.state.conceptLists, []],
      targetTopic: this.state.conceptLists.length,
    });
  }

  async uploadCorpus(text: string): Promise<void> {
    try {
      const records = parseRecords(text);
      const corpus = await this.client.uploadCorpus(records);
      this.set({ corpus, error: null });
    } catch (err) {
      this.set({ error: message(err) });
    }
  }

  async expand(): Promise<void> {
    if (!this.state.query.trim()) {
      this.set({ error: 'enter a query phrase first' });
      return;
    }
    try {
      const result = await this.client.expandQuery(this.state.query.trim());
      this.set({ candidates: result.words, error: null });
    } catch (err) {
      this.set({ candidates: [], error: message(err) });
    }
  }

  /** "+" on a candidate (or a free-text word) joins the target topic's list. */
  addWord(word: string): void {
    const trimmed = word.trim();
    if (!trimmed) return;
    const lists = this.state.conceptLists.map((l) => [...l]);
    const target = lists[this.state.targetTopic];
    if (!target.includes(trimmed)) {
      target.push(trimmed);
    }
    this.set({ conceptLists: lists });
  }

  /** "-" on a final-list entry removes it again. */
  removeWord(topicIndex: number, word: string): void {
    const lists = this.state.conceptLists.map((l) => [...l]);
    if (topicIndex < 0 || topicIndex >= lists.length) return;
    lists[topicIndex] = lists[topicIndex].filter((w) => w !== word);
    this.set({ conceptLists: lists });
  }

  priors(): Record<string, string[]> {
    const priors: Record<string, string[]> = {};
    this.state.conceptLists.forEach((words, i) => {
      if (words.length > 0) {
        priors[String(i)] = words;
      }
    });
    return priors;
  }

  /** Create the model from the drafts, then train the root into node 2. */
  async apply(): Promise<void> {
    const { corpus, kInit, trainIters, seed } = this.state;
    if (!corpus) {
      this.set({ error: 'upload a corpus first' });
      return;
    }
    this.set({ phase: 'creating', error: null, trainedNode: null });
    try {
      const created = await this.client.createModel({
        corpus_id: corpus.corpus_id,
        hyper: { k_init: kInit, seed },
        priors: this.priors(),
      });
      this.set({ created, warnings: created.warnings, phase: 'training' });
      const ticket = await this.client.train(created.tree_id, created.root, trainIters);
      const job = await pollJob(this.client, ticket, {
        intervalMs: this.pollIntervalMs,
        onProgress: (j) => this.set({ job: j }),
      });
      this.set({ phase: 'ready', trainedNode: job.node_id, job: null });
    } catch (err) {
      const detail = err instanceof ApiError ? err.message : message(err);
      this.set({ phase: 'editing', error: detail, job: null });
    }
  }
}

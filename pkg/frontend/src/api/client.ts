/**
 * Typed fetch wrapper for the topicloop service.
 *
 * The fetch function is injectable so tests can swap in a mock transport;
 * everything else, including error mapping, stays identical.
 */
import type {
  CompareEntry,
  HistoryRecord,
  CorpusCreated,
  CorpusRecord,
  CorpusSummary,
  ExpandResult,
  Job,
  JobTicket,
  MapPoint,
  ModelCreated,
  ModelRequest,
  PendingList,
  Refinement,
  TopicDetail,
  TopicSummary,
  TreeView,
  UndoResult,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = 'ApiError';
  }
}

async function errorDetail(resp: Response): Promise<string> {
  try {
    const body = (await resp.json()) as { detail?: unknown };
    if (typeof body.detail === 'string') return body.detail;
    if (body.detail !== undefined) return JSON.stringify(body.detail);
  } catch {
    // fall through to the status line
  }
  return `request failed with status ${resp.status}`;
}

export class ApiClient {
  constructor(
    private readonly base: string = '',
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, await errorDetail(resp));
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
  }

  uploadCorpus(records: CorpusRecord[], minDocFreq = 1): Promise<CorpusCreated> {
    return this.post('/corpora', { records, min_doc_freq: minDocFreq });
  }

  corpus(corpusId: string): Promise<CorpusSummary> {
    return this.request(`/corpora/${corpusId}`);
  }

  expandQuery(phrase: string, n = 30): Promise<ExpandResult> {
    return this.post('/expand-query', { phrase, n });
  }

  createModel(body: ModelRequest): Promise<ModelCreated> {
    return this.post('/models', body);
  }

  tree(treeId: string): Promise<TreeView> {
    return this.request(`/trees/${treeId}`);
  }

  train(treeId: string, node: number, iters: number): Promise<JobTicket> {
    return this.post(`/trees/${treeId}/nodes/${node}/train`, { iters });
  }

  job(jobId: string): Promise<Job> {
    return this.request(`/jobs/${jobId}`);
  }

  topics(treeId: string, node: number): Promise<TopicSummary[]> {
    return this.request(`/trees/${treeId}/nodes/${node}/topics`);
  }

  topic(treeId: string, node: number, topic: number): Promise<TopicDetail> {
    return this.request(`/trees/${treeId}/nodes/${node}/topics/${topic}`);
  }

  map(treeId: string, node: number): Promise<MapPoint[]> {
    return this.request(`/trees/${treeId}/nodes/${node}/map`);
  }

  pending(treeId: string, node: number): Promise<PendingList> {
    return this.request(`/trees/${treeId}/nodes/${node}/pending`);
  }

  queueRefinement(treeId: string, node: number, ref: Refinement): Promise<PendingList> {
    return this.post(`/trees/${treeId}/nodes/${node}/pending`, ref);
  }

  undoLast(treeId: string, node: number): Promise<UndoResult> {
    return this.request(`/trees/${treeId}/nodes/${node}/pending/last`, {
      method: 'DELETE',
    });
  }

  apply(treeId: string, node: number): Promise<JobTicket> {
    return this.post(`/trees/${treeId}/nodes/${node}/apply`);
  }

  history(treeId: string, parent: number, child: number): Promise<HistoryRecord[]> {
    return this.request(`/trees/${treeId}/history?parent=${parent}&child=${child}`);
  }

  compare(treeId: string, ids: number[]): Promise<CompareEntry[]> {
    return this.request(`/trees/${treeId}/compare?ids=${ids.join(',')}`);
  }

  async downloadTree(treeId: string): Promise<Blob> {
    const resp = await this.fetchFn(`${this.base}/trees/${treeId}/file`);
    if (!resp.ok) {
      throw new ApiError(resp.status, await errorDetail(resp));
    }
    return resp.blob();
  }

  uploadTree(treeId: string, archive: ArrayBuffer | Blob): Promise<{ tree_id: string; nodes: number[] }> {
    return this.request(`/trees/${treeId}/file`, {
      method: 'PUT',
      headers: { 'Content-Type': 'application/zip' },
      body: archive,
    });
  }
}

/**
 * State behind the model window: the selected node's topics, map, pending
 * refinements, and the background job, if any.
 *
 * Every mutation round-trips through the server and the displayed pending
 * list is taken from the server's acknowledgment, never updated
 * optimistically, so the panel and the server cannot disagree at rest.
 */
import { ApiClient } from '../api/client.js';
import { pollJob } from '../api/poll.js';
import type {
  CompareEntry,
  HistoryRecord,
  Job,
  MapPoint,
  Refinement,
  TopicDetail,
  TopicSummary,
  TreeView,
} from '../api/types.js';
import { Observable } from './observable.js';

export interface EdgeHistory {
  parent: number;
  child: number;
  records: HistoryRecord[];
}

export interface ModelState {
  treeId: string;
  tree: TreeView | null;
  selectedNode: number | null;
  topics: TopicSummary[];
  selectedTopic: number | null;
  detail: TopicDetail | null;
  mapPoints: MapPoint[];
  pending: Refinement[];
  historyEdge: EdgeHistory | null;
  compare: CompareEntry[] | null;
  job: Job | null;
  busy: boolean;
  addPanelOpen: boolean;
  viewedDoc: { doc_id: string; text: string } | null;
  error: string | null;
}

export interface ModelOptions {
  pollIntervalMs?: number;
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

export class ModelStore extends Observable<ModelState> {
  private readonly pollIntervalMs: number;

  constructor(
    private readonly client: ApiClient,
    treeId: string,
    options: ModelOptions = {},
  ) {
    super({
      treeId,
      tree: null,
      selectedNode: null,
      topics: [],
      selectedTopic: null,
      detail: null,
      mapPoints: [],
      pending: [],
      historyEdge: null,
      compare: null,
      job: null,
      busy: false,
      addPanelOpen: false,
      viewedDoc: null,
      error: null,
    });
    this.pollIntervalMs = options.pollIntervalMs ?? 1000;
  }

  /** Fetch the tree and focus a node (the newest one by default). */
  async load(focus?: number): Promise<void> {
    try {
      const tree = await this.client.tree(this.state.treeId);
      this.set({ tree, error: null });
      const ids = tree.nodes.map((n) => n.id);
      const target = focus !== undefined && ids.includes(focus) ? focus : Math.max(...ids);
      await this.selectNode(target);
    } catch (err) {
      this.set({ error: message(err) });
    }
  }

  async selectNode(nodeId: number): Promise<void> {
    this.set({
      selectedNode: nodeId,
      selectedTopic: null,
      detail: null,
      historyEdge: null,
      addPanelOpen: false,
      viewedDoc: null,
    });
    const { treeId } = this.state;
    try {
      const [topics, mapPoints, pending] = await Promise.all([
        this.client.topics(treeId, nodeId),
        this.client.map(treeId, nodeId),
        this.client.pending(treeId, nodeId),
      ]);
      this.set({ topics, mapPoints, pending: pending.pending, error: null });
    } catch (err) {
      this.set({ topics: [], mapPoints: [], error: message(err) });
    }
  }

  async selectTopic(topic: number): Promise<void> {
    const { treeId, selectedNode } = this.state;
    if (selectedNode === null) return;
    try {
      const detail = await this.client.topic(treeId, selectedNode, topic);
      this.set({ selectedTopic: topic, detail, addPanelOpen: false, error: null });
    } catch (err) {
      this.set({ error: message(err) });
    }
  }

  toggleAddPanel(): void {
    this.set({ addPanelOpen: !this.state.addPanelOpen });
  }

  viewDoc(doc: { doc_id: string; text: string } | null): void {
    this.set({ viewedDoc: doc });
  }

  async showEdge(parent: number, child: number): Promise<void> {
    try {
      const records = await this.client.history(this.state.treeId, parent, child);
      this.set({ historyEdge: { parent, child, records }, error: null });
    } catch (err) {
      this.set({ historyEdge: null, error: message(err) });
    }
  }

  async compareNodes(ids: number[]): Promise<void> {
    try {
      const compare = await this.client.compare(this.state.treeId, ids);
      this.set({ compare, error: null });
    } catch (err) {
      this.set({ compare: null, error: message(err) });
    }
  }

  clearCompare(): void {
    this.set({ compare: null });
  }

  /** Queue one refinement; the displayed list is the server's response. */
  async queue(ref: Refinement): Promise<void> {
    const { treeId, selectedNode } = this.state;
    if (selectedNode === null) return;
    try {
      const result = await this.client.queueRefinement(treeId, selectedNode, ref);
      this.set({ pending: result.pending, error: null });
    } catch (err) {
      this.set({ error: message(err) });
    }
  }

  async undo(): Promise<void> {
    const { treeId, selectedNode } = this.state;
    if (selectedNode === null) return;
    try {
      const result = await this.client.undoLast(treeId, selectedNode);
      this.set({ pending: result.pending, error: null });
    } catch (err) {
      this.set({ error: message(err) });
    }
  }

  /** Apply the pending queue; on success focus jumps to the new child. */
  async applyPending(): Promise<void> {
    const { treeId, selectedNode, busy } = this.state;
    if (selectedNode === null || busy) return;
    this.set({ busy: true, error: null });
    try {
      const ticket = await this.client.apply(treeId, selectedNode);
      const job = await pollJob(this.client, ticket, {
        intervalMs: this.pollIntervalMs,
        onProgress: (j) => this.set({ job: j }),
      });
      this.set({ busy: false, job: null });
      await this.load(job.node_id ?? undefined);
    } catch (err) {
      this.set({ busy: false, job: null, error: message(err) });
      await this.refreshPending();
    }
  }

  /** Resample from the selected node, committing a fresh child. */
  async trainFrom(iters: number): Promise<void> {
    const { treeId, selectedNode, busy } = this.state;
    if (selectedNode === null || busy) return;
    this.set({ busy: true, error: null });
    try {
      const ticket = await this.client.train(treeId, selectedNode, iters);
      const job = await pollJob(this.client, ticket, {
        intervalMs: this.pollIntervalMs,
        onProgress: (j) => this.set({ job: j }),
      });
      this.set({ busy: false, job: null });
      await this.load(job.node_id ?? undefined);
    } catch (err) {
      this.set({ busy: false, job: null, error: message(err) });
    }
  }

  async download(): Promise<Blob> {
    return this.client.downloadTree(this.state.treeId);
  }

  async uploadArchive(archive: ArrayBuffer | Blob): Promise<void> {
    try {
      await this.client.uploadTree(this.state.treeId, archive);
      await this.load();
    } catch (err) {
      this.set({ error: message(err) });
    }
  }

  private async refreshPending(): Promise<void> {
    const { treeId, selectedNode } = this.state;
    if (selectedNode === null) return;
    try {
      const pending = await this.client.pending(treeId, selectedNode);
      this.set({ pending: pending.pending });
    } catch {
      // the primary error is already on display
    }
  }
}

import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api/client.js';
import { describeRefinement } from '../src/api/types.js';
import { ModelStore } from '../src/state/model.js';
import { ModelWindow } from '../src/views/modelWindow.js';
import { click, mount, texts, typeInto, until } from './helpers.js';
import { MockApi, recorded } from './mockApi.js';

const TREE_ID = recorded.tree.tree_id;

let mock: MockApi;
let client: ApiClient;
let store: ModelStore;
let root: HTMLElement;

async function openWindow(options: { singleRoot?: boolean } = {}): Promise<void> {
  mock = new MockApi(options);
  client = new ApiClient('', mock.fetch);
  store = new ModelStore(client, TREE_ID, { pollIntervalMs: 2 });
  root = mount();
  new ModelWindow(root, store);
  await store.load();
}

async function focusTopicZero(): Promise<void> {
  click(root.querySelector('.tree-node[data-node-id="4"]'));
  await until(() => store.getState().selectedNode === 4 && store.getState().topics.length > 0);
  click(root.querySelector('.topic-row[data-topic="0"] .view-topic'));
  await until(() => root.querySelector('.topic-detail[data-topic="0"]') !== null);
}

describe('criterion 13: model window renders the tree and drives refinement', () => {
  beforeEach(async () => {
    await openWindow();
  });

  it('draws the branched tree and focuses the newest model', () => {
    expect(root.querySelectorAll('.tree-node')).toHaveLength(7);
    expect(root.querySelectorAll('.tree-edge')).toHaveLength(6);
    expect(root.querySelector('.tree-node.selected')!.getAttribute('data-node-id')).toBe('7');

    const siblings = [...root.querySelectorAll('.tree-edge[data-parent="4"]')];
    expect(siblings).toHaveLength(3);
    const childYs = siblings.map((e) => e.getAttribute('y2'));
    expect(new Set(childYs).size).toBe(3);
  });

  it('clicking an edge lists the refinements that created the child', async () => {
    click(root.querySelector('.tree-edge[data-parent="4"][data-child="5"]'));
    await until(() => root.querySelector('.history-item') !== null);
    expect(root.querySelector('.history-edge')!.textContent).toBe('model 4 to model 5');
    expect(texts(root, '.history-item')).toEqual(['add "sonata" to topic 0']);

    click(root.querySelector('.tree-edge[data-parent="1"][data-child="2"]'));
    await until(() => texts(root, '.history-item')[0] === 'resampled for 30 sweeps');
  });

  it('clicking a node shows the topics it holds', async () => {
    click(root.querySelector('.tree-node[data-node-id="4"]'));
    await until(() => root.querySelectorAll('.topic-row').length === recorded.topics.length);
    const labels = texts(root, '.topic-row td:nth-child(2)');
    expect(labels).toEqual(recorded.topics.map((t) => t.label));
  });

  it('queues a suggested word and undoes it, mirroring the server queue', async () => {
    await focusTopicZero();
    const words = texts(root, '.word-row td:first-child');
    expect(words).toEqual(recorded.topic_detail_suggest.words.map(([w]) => w));

    click(root.querySelector('.open-add-panel'));
    await until(() => root.querySelectorAll('.suggestion').length > 0);
    const suggested = [...root.querySelectorAll('.suggestion')].map(
      (n) => (n as HTMLElement).dataset.word,
    );
    expect(suggested).toEqual(recorded.topic_detail_suggest.suggestions.map((s) => s.word));

    click(root.querySelector('.suggestion[data-word="sonata"] .add-suggested'));
    await until(() => root.querySelectorAll('.pending-item').length === 1);
    expect(mock.pendingOf(4)).toEqual([{ type: 'add_word', topic: 0, word: 'sonata' }]);
    expect(texts(root, '.pending-item')).toEqual(mock.pendingOf(4).map(describeRefinement));

    click(root.querySelector('.undo-refinement'));
    await until(() => root.querySelectorAll('.pending-item').length === 0);
    expect(mock.pendingOf(4)).toEqual([]);
  });

  it('rejects an unknown free-text word and keeps the queue unchanged', async () => {
    await focusTopicZero();
    click(root.querySelector('.open-add-panel'));
    await until(() => root.querySelector('.add-free-input') !== null);
    typeInto(root.querySelector('.add-free-input'), 'zzz');
    click(root.querySelector('.add-free-submit'));
    await until(() => root.querySelector('.error') !== null);
    expect(root.querySelector('.error')!.textContent).toBe(recorded.error_bad_word.detail);
    expect(root.querySelectorAll('.pending-item')).toHaveLength(0);
    expect(mock.pendingOf(4)).toEqual([]);
  });

  it('maps the raise gesture onto a swap against the word above', async () => {
    await focusTopicZero();
    click(root.querySelector('.word-row[data-word="cello"] .swap-up'));
    await until(() => root.querySelectorAll('.pending-item').length === 1);
    expect(mock.pendingOf(4)).toEqual([
      { type: 'swap_order', topic: 0, higher: 'piano', lower: 'cello' },
    ]);
    expect(texts(root, '.pending-item')).toEqual(['raise "cello" above "piano" in topic 0']);
  });

  it('queues word removal, document removal, merge, and split', async () => {
    await focusTopicZero();
    click(root.querySelector('.word-row[data-word="rhythm"] .remove-topic-word'));
    await until(() => root.querySelectorAll('.pending-item').length === 1);
    click(root.querySelector('.doc-row[data-doc="1"] .remove-doc'));
    await until(() => root.querySelectorAll('.pending-item').length === 2);
    click(root.querySelector('.queue-merge'));
    await until(() => root.querySelectorAll('.pending-item').length === 3);
    typeInto(root.querySelector('.split-seeds'), 'opera tenor');
    click(root.querySelector('.queue-split'));
    await until(() => root.querySelectorAll('.pending-item').length === 4);

    expect(mock.pendingOf(4)).toEqual([
      { type: 'remove_word', topic: 0, word: 'rhythm' },
      { type: 'remove_doc', topic: 0, doc: 1 },
      { type: 'merge_topics', keep: 0, absorb: 1 },
      { type: 'split_topic', topic: 0, seed_words: ['opera', 'tenor'] },
    ]);
    expect(root.querySelectorAll('.pending-item')).toHaveLength(4);
  });

  it('shows a document full text on view and closes it again', async () => {
    await focusTopicZero();
    click(root.querySelector('.doc-row[data-doc="1"] .view-doc'));
    await until(() => root.querySelector('.doc-viewer') !== null);
    const first = recorded.topic_detail_suggest.docs[0];
    expect(root.querySelector('.doc-viewer h4')!.textContent).toContain(first.doc_id);
    expect(root.querySelector('.doc-text')!.textContent).toBe(first.text);
    click(root.querySelector('.close-doc'));
    await until(() => root.querySelector('.doc-viewer') === null);
  });

  it('applies the queue through a job and lands on the new child', async () => {
    await focusTopicZero();
    click(root.querySelector('.open-add-panel'));
    await until(() => root.querySelector('.suggestion') !== null);
    click(root.querySelector('.suggestion[data-word="sonata"] .add-suggested'));
    await until(() => root.querySelectorAll('.pending-item').length === 1);

    const banners: string[] = [];
    const disabledWhileBusy: boolean[] = [];
    store.subscribe(() => {
      const s = store.getState();
      if (s.busy && s.job) {
        banners.push(root.querySelector('.job-banner')?.textContent ?? '');
        const apply = root.querySelector('.apply-refinements') as HTMLButtonElement;
        disabledWhileBusy.push(apply.disabled);
      }
    });

    click(root.querySelector('.apply-refinements'));
    await until(
      () => store.getState().selectedNode === 8 && store.getState().pending.length === 0,
      5000,
    );

    expect(banners.length).toBeGreaterThan(0);
    expect(banners[0]).toContain('apply:');
    expect(disabledWhileBusy.every(Boolean)).toBe(true);

    expect(root.querySelectorAll('.tree-node')).toHaveLength(8);
    expect(root.querySelector('.tree-node.selected')!.getAttribute('data-node-id')).toBe('8');
    expect(mock.nodes.find((n) => n.id === 8)?.parent).toBe(4);
    expect(mock.pendingOf(4)).toEqual([]);
    expect(root.querySelectorAll('.pending-item')).toHaveLength(0);

    click(root.querySelector('.tree-edge[data-parent="4"][data-child="8"]'));
    await until(() => root.querySelector('.history-item') !== null);
    expect(texts(root, '.history-item')).toEqual(['add "sonata" to topic 0']);
  });

  it('keeps apply disabled with an empty queue and survives a failed apply', async () => {
    expect((root.querySelector('.apply-refinements') as HTMLButtonElement).disabled).toBe(true);

    await focusTopicZero();
    click(root.querySelector('.open-add-panel'));
    await until(() => root.querySelector('.suggestion') !== null);
    click(root.querySelector('.suggestion[data-word="sonata"] .add-suggested'));
    await until(() => root.querySelectorAll('.pending-item').length === 1);

    mock.failNextApply = true;
    click(root.querySelector('.apply-refinements'));
    await until(() => root.querySelector('.error') !== null, 5000);
    expect(root.querySelector('.error')!.textContent).toContain('sampling weights');

    expect(root.querySelectorAll('.tree-node')).toHaveLength(7);
    expect(mock.pendingOf(4)).toHaveLength(1);
    expect(root.querySelectorAll('.pending-item')).toHaveLength(1);
    expect((root.querySelector('.apply-refinements') as HTMLButtonElement).disabled).toBe(false);
  });

  it('refuses a second job while one is running', async () => {
    const ticket = await client.train(TREE_ID, 7, 30);
    await expect(client.train(TREE_ID, 7, 10)).rejects.toThrow(
      'another job is already running',
    );
    const job = await pollUntilDone(ticket.job_id);
    expect(job.status).toBe('done');
  });

  it('resampling from the focused node commits a train child', async () => {
    click(root.querySelector('.train-node'));
    await until(() => store.getState().selectedNode === 8, 5000);
    expect(root.querySelector('.tree-edge[data-parent="7"][data-child="8"]')).not.toBeNull();
    click(root.querySelector('.tree-edge[data-parent="7"][data-child="8"]'));
    await until(() => root.querySelector('.history-item') !== null);
    expect(texts(root, '.history-item')).toEqual(['resampled for 50 sweeps']);
  });

  it('runs a side-by-side compare of two models', async () => {
    click(root.querySelector('.compare-run'));
    await until(() => root.querySelectorAll('.compare-column').length > 0);
    expect(texts(root, '.compare-column h5')).toEqual(
      recorded.compare.map((e) => `model ${e.node_id}`),
    );
    click(root.querySelector('.compare-clear'));
    await until(() => root.querySelectorAll('.compare-column').length === 0);
  });

  it('downloads the tree archive and restores one over a bare root', async () => {
    const blob = await store.download();
    expect(blob.size).toBeGreaterThan(0);

    await openWindow({ singleRoot: true });
    expect(root.querySelectorAll('.tree-node')).toHaveLength(1);
    await store.uploadArchive(new Uint8Array([0x50, 0x4b]).buffer);
    await until(() => root.querySelectorAll('.tree-node').length === 7);
  });
});

describe('criterion 13: distance map circles', () => {
  beforeEach(async () => {
    await openWindow();
  });

  it('renders one circle per topic with radii ordered like the weights', () => {
    const groups = [...root.querySelectorAll('.map-topic')];
    expect(groups).toHaveLength(recorded.map.length);

    const byTopic = new Map(
      groups.map((g) => [
        Number(g.getAttribute('data-topic')),
        Number(g.querySelector('.map-circle')!.getAttribute('r')),
      ]),
    );
    const sortedByWeight = [...recorded.map].sort((a, b) => b.weight - a.weight);
    const radii = sortedByWeight.map((p) => byTopic.get(p.topic)!);
    for (let i = 1; i < radii.length; i++) {
      expect(radii[i - 1]).toBeGreaterThan(radii[i]);
    }

    const tip = root.querySelector('.map-topic[data-topic="0"] title');
    expect(tip!.textContent).toBe('topic 0: weight 0.550');
    expect(root.querySelector('.map-total')!.textContent).toBe('3 topics, weights sum 1.00');
  });

  it('clicking a circle focuses that topic in the detail panel', async () => {
    click(root.querySelector('.map-topic[data-topic="0"]'));
    await until(() => root.querySelector('.topic-detail[data-topic="0"]') !== null);
    expect(root.querySelector('.map-topic[data-topic="0"] .map-circle.selected')).not.toBeNull();
    expect(
      root.querySelector('.topic-row[data-topic="0"]')!.classList.contains('selected'),
    ).toBe(true);
  });
});

async function pollUntilDone(jobId: string) {
  for (;;) {
    const job = await client.job(jobId);
    if (job.status !== 'running') return job;
    await new Promise((r) => setTimeout(r, 2));
  }
}

/**
 * Model-history panel: the branching tree of models on top, pending
 * refinements and edge history below, with download/load and compare
 * controls.
 *
 * Clicking a node focuses it; clicking an edge lists the refinements that
 * produced the child. Apply and train stay disabled while a job runs, as
 * the server accepts one job per tree at a time.
 */
import type { ModelStore } from '../state/model.js';
import { describeRefinement } from '../api/types.js';
import { clear, el, svgEl } from './dom.js';
import { layoutTree } from './treeLayout.js';

export class TreePanel {
  constructor(
    private readonly root: HTMLElement,
    private readonly store: ModelStore,
  ) {
    this.root.classList.add('tree-panel');
  }

  render(): void {
    const s = this.store.getState();
    clear(this.root);
    this.root.append(el('h3', { text: 'Model history' }));

    if (s.tree) {
      this.root.append(this.renderTree(s.tree.nodes, s.selectedNode));
    }

    if (s.job) {
      this.root.append(
        el('p', {
          className: 'job-banner',
          text: `${s.job.phase}: ${s.job.done_iters}/${s.job.total_iters} sweeps`,
        }),
      );
    }

    const pendingBox = el('div', { className: 'pending-box' }, [
      el('h4', {
        text:
          s.selectedNode === null
            ? 'Pending refinements'
            : `Pending refinements (model ${s.selectedNode})`,
      }),
    ]);
    if (s.pending.length === 0) {
      pendingBox.append(el('p', { className: 'placeholder', text: 'none queued' }));
    } else {
      const list = el('ol', { className: 'pending-list' });
      for (const ref of s.pending) {
        list.append(el('li', { className: 'pending-item', text: describeRefinement(ref) }));
      }
      pendingBox.append(list);
    }
    pendingBox.append(
      el('button', {
        className: 'undo-refinement',
        text: 'Undo',
        disabled: s.pending.length === 0 || s.busy,
        onClick: () => void this.store.undo(),
      }),
      el('button', {
        className: 'apply-refinements',
        text: 'Apply refinements',
        disabled: s.pending.length === 0 || s.busy,
        onClick: () => void this.store.applyPending(),
      }),
      el('button', {
        className: 'train-node',
        text: 'Resample (50)',
        disabled: s.busy,
        onClick: () => void this.store.trainFrom(50),
      }),
    );
    this.root.append(pendingBox);

    const historyBox = el('div', { className: 'history-box' }, [
      el('h4', { text: 'Refinements history' }),
    ]);
    if (s.historyEdge) {
      historyBox.append(
        el('p', {
          className: 'history-edge',
          text: `model ${s.historyEdge.parent} to model ${s.historyEdge.child}`,
        }),
      );
      if (s.historyEdge.records.length === 0) {
        historyBox.append(el('p', { className: 'placeholder', text: 'plain resampling' }));
      } else {
        const list = el('ol', { className: 'history-list' });
        for (const ref of s.historyEdge.records) {
          list.append(el('li', { className: 'history-item', text: describeRefinement(ref) }));
        }
        historyBox.append(list);
      }
    } else {
      historyBox.append(
        el('p', { className: 'placeholder', text: 'click an edge to see its refinements' }),
      );
    }
    this.root.append(historyBox);

    this.root.append(this.renderCompare(s));
    this.root.append(this.renderExchange(s.busy));
    if (s.error) {
      this.root.append(el('p', { className: 'error', text: s.error }));
    }
  }

  private renderTree(
    nodes: { id: number; parent: number | null; children: number[] }[],
    selected: number | null,
  ): SVGElement {
    const layout = layoutTree(nodes);
    const svg = svgEl('svg', {
      class: 'tree-canvas',
      viewBox: `0 0 ${layout.width} ${layout.height}`,
      width: String(layout.width),
      height: String(layout.height),
    });
    for (const edge of layout.edges) {
      const line = svgEl('line', {
        class: 'tree-edge',
        'data-parent': String(edge.parent),
        'data-child': String(edge.child),
        x1: String(edge.x1),
        y1: String(edge.y1),
        x2: String(edge.x2),
        y2: String(edge.y2),
      });
      line.addEventListener('click', () => void this.store.showEdge(edge.parent, edge.child));
      svg.append(line);
    }
    for (const node of layout.nodes) {
      const group = svgEl('g', {
        class: node.id === selected ? 'tree-node selected' : 'tree-node',
        'data-node-id': String(node.id),
      });
      group.append(
        svgEl('circle', { cx: String(node.x), cy: String(node.y), r: '12' }),
      );
      const label = svgEl('text', {
        x: String(node.x),
        y: String(node.y + 4),
        'text-anchor': 'middle',
      });
      label.textContent = String(node.id);
      group.append(label);
      group.addEventListener('click', () => void this.store.selectNode(node.id));
      svg.append(group);
    }
    return svg;
  }

  private renderCompare(s: ReturnType<ModelStore['getState']>): HTMLElement {
    const box = el('div', { className: 'compare-box' }, [el('h4', { text: 'Compare models' })]);
    const ids = (s.tree?.nodes ?? []).map((n) => n.id);
    const left = el('select', { className: 'compare-left' });
    const right = el('select', { className: 'compare-right' });
    for (const select of [left, right]) {
      for (const id of ids) {
        select.append(el('option', { text: `model ${id}`, value: String(id) }));
      }
    }
    if (ids.length > 1) {
      right.value = String(ids[ids.length - 1]);
    }
    box.append(
      left,
      right,
      el('button', {
        className: 'compare-run',
        text: 'Compare',
        disabled: ids.length === 0,
        onClick: () => void this.store.compareNodes([Number(left.value), Number(right.value)]),
      }),
    );
    if (s.compare) {
      const table = el('div', { className: 'compare-result' });
      for (const entry of s.compare) {
        const column = el('div', { className: 'compare-column', dataset: { node: String(entry.node_id) } }, [
          el('h5', { text: `model ${entry.node_id}` }),
        ]);
        for (const topic of entry.topics) {
          const words = topic.words
            .slice(0, 5)
            .map(([w]) => w)
            .join(', ');
          column.append(el('p', { text: `topic ${topic.topic}: ${words}` }));
        }
        table.append(column);
      }
      table.append(
        el('button', {
          className: 'compare-clear',
          text: 'Close',
          onClick: () => this.store.clearCompare(),
        }),
      );
      box.append(table);
    }
    return box;
  }

  private renderExchange(busy: boolean): HTMLElement {
    const box = el('div', { className: 'exchange-box' });
    box.append(
      el('button', {
        className: 'download-tree',
        text: 'Download models',
        onClick: () => void this.downloadArchive(),
      }),
    );
    const fileInput = el('input', { className: 'load-tree-file', type: 'file' });
    fileInput.addEventListener('change', () => {
      const file = fileInput.files?.[0];
      if (file) {
        void file.arrayBuffer().then((buf) => this.store.uploadArchive(buf));
      }
    });
    box.append(
      el('label', { className: 'load-tree' }, [el('span', { text: 'Load models ' }), fileInput]),
    );
    if (busy) {
      for (const button of box.querySelectorAll('button')) {
        button.disabled = true;
      }
    }
    return box;
  }

  private async downloadArchive(): Promise<void> {
    const blob = await this.store.download();
    // happy-dom lacks createObjectURL; skip the anchor dance under test
    if (typeof URL.createObjectURL !== 'function') return;
    const url = URL.createObjectURL(blob);
    const anchor = el('a', { className: 'download-anchor' });
    anchor.href = url;
    anchor.download = `${this.store.getState().treeId}.tpl`;
    anchor.click();
    URL.revokeObjectURL(url);
  }
}

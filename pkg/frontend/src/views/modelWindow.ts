/**
 * Model window: history panel on the left, topic detail in the middle,
 * distance map on the right. One store drives all three.
 */
import type { ModelStore } from '../state/model.js';
import { clear, el } from './dom.js';
import { DistanceMapView } from './distanceMap.js';
import { TopicPanel } from './topicPanel.js';
import { TreePanel } from './treePanel.js';

export class ModelWindow {
  private readonly tree: TreePanel;
  private readonly topics: TopicPanel;
  private readonly map: DistanceMapView;

  constructor(
    private readonly root: HTMLElement,
    private readonly store: ModelStore,
  ) {
    this.root.classList.add('model-window');
    clear(this.root);
    const left = el('section', { className: 'column history-column' });
    const middle = el('section', { className: 'column detail-column' });
    const right = el('section', { className: 'column map-column' });
    this.root.append(left, middle, right);

    this.tree = new TreePanel(left, store);
    this.topics = new TopicPanel(middle, store);
    this.map = new DistanceMapView(right, (topic) => void store.selectTopic(topic));

    store.subscribe(() => this.render());
    this.render();
  }

  render(): void {
    const s = this.store.getState();
    this.tree.render();
    this.topics.render();
    this.map.render(s.mapPoints, s.selectedTopic);
  }
}

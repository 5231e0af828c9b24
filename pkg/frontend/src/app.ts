/**
 * Browser entry point: a two-window client for the topicloop service.
 *
 * The setup window curates concept words and creates a model; the model
 * window explores and refines it. The API base defaults to /api, which
 * the bundled dev server proxies to the service.
 */
import { ApiClient } from './api/client.js';
import { ModelStore } from './state/model.js';
import { SetupStore } from './state/setup.js';
import { clear, el } from './views/dom.js';
import { ModelWindow } from './views/modelWindow.js';
import { SetupView } from './views/setupView.js';

export function mountApp(root: HTMLElement, client: ApiClient): void {
  const nav = el('nav', { className: 'top-nav' });
  const content = el('main', { className: 'content' });
  root.append(nav, content);

  const setupStore = new SetupStore(client);

  const showSetup = () => {
    clear(content);
    const host = el('div', {});
    content.append(host);
    new SetupView(host, setupStore, openModel);
  };

  const openModel = (treeId: string) => {
    clear(content);
    const host = el('div', {});
    content.append(host);
    const store = new ModelStore(client, treeId);
    new ModelWindow(host, store);
    void store.load();
  };

  nav.append(
    el('button', { className: 'nav-setup', text: 'Setup', onClick: showSetup }),
    el('span', { className: 'nav-title', text: 'topicloop' }),
  );
  showSetup();
}

declare global {
  interface Window {
    TOPICLOOP_API?: string;
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  const base = window.TOPICLOOP_API ?? '/api';
  mountApp(document.getElementById('app') as HTMLElement, new ApiClient(base));
}

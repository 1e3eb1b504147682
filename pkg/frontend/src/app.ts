/** Entry point: wire the store to the three regions of the page. */

import { ApiClient } from './api.js';
import { renderPanes, renderTable, renderToolbar } from './render.js';
import { Store } from './store.js';

export function mount(root: Document = document, baseUrl = ''): Store {
  const store = new Store(new ApiClient(baseUrl));
  const table = root.getElementById('table-region');
  const transformPane = root.getElementById('transform-pane');
  const featurePane = root.getElementById('feature-pane');
  const toolbar = root.getElementById('toolbar');
  if (!table || !transformPane || !featurePane || !toolbar) {
    throw new Error('missing page regions; index.html out of sync');
  }

  store.subscribe(() => {
    renderToolbar(store, toolbar);
    renderTable(store, table);
    renderPanes(store, transformPane, featurePane);
  });

  void store.init();
  return store;
}

declare global {
  interface Window {
    auginspect?: Store;
  }
}

if (typeof window !== 'undefined' && typeof document !== 'undefined' && document.getElementById('table-region')) {
  window.auginspect = mount();
}

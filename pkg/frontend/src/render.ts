/** DOM rendering for the three regions: data table and the two provenance
 * panes. Rendering is a pure function of the store state; all counters come
 * straight from API payloads. */

import { segmentText } from './highlight.js';
import { Store } from './store.js';
import type { GroupSummary, MetricName, Row, SortKey } from './types.js';

const METRICS: MetricName[] = ['fluency', 'grammaticality', 'alignment'];

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function highlightedText(text: string, spans: [number, number][]): HTMLElement {
  const container = el('span', 'text-cell');
  for (const segment of segmentText(text, spans)) {
    const piece = el('span', segment.highlighted ? 'hl' : undefined, segment.text);
    container.appendChild(piece);
  }
  return container;
}

function metricCell(row: Row, metric: MetricName): HTMLElement {
  const value = row.scores ? row.scores[metric] : null;
  const cell = el('td', `metric ${metric}`);
  cell.textContent = value === null ? '–' : value.toFixed(2);
  if (value !== null && value < 0.5) cell.classList.add('low');
  return cell;
}

function verdictCell(row: Row): HTMLElement {
  const cell = el('td', 'verdict');
  if (!row.verdict) {
    cell.textContent = '';
    return cell; // guidance unavailable: blank cell, marking stays enabled
  }
  const badge = el(
    'span',
    row.verdict.consistent ? 'badge consistent' : 'badge inconsistent',
    row.verdict.predicted_label,
  );
  badge.title = row.verdict.consistent ? 'matches the label' : 'differs from the label';
  cell.appendChild(badge);
  if (row.verdict.explanation) {
    const details = el('details');
    details.appendChild(el('summary', undefined, 'why'));
    details.appendChild(el('p', 'explanation', row.verdict.explanation));
    cell.appendChild(details);
  }
  return cell;
}

function markCell(store: Store, row: Row): HTMLElement {
  const cell = el('td', 'mark');
  for (const [state, symbol, title] of [
    ['high_quality', '✓', 'mark high quality'],
    ['low_quality', '✗', 'mark low quality'],
    ['unmarked', '·', 'clear mark'],
  ] as const) {
    const button = el('button', `mark-btn ${state}`, symbol) as HTMLButtonElement;
    button.title = title;
    if (row.mark === state) button.classList.add('active');
    button.addEventListener('click', () => void store.mark(row.id, state));
    cell.appendChild(button);
  }
  return cell;
}

export function renderTable(store: Store, container: HTMLElement): void {
  const { rows, sort, dir, total, page, pageSize, selection } = store.state;
  container.replaceChildren();

  const table = el('table', 'data-table');
  const head = el('thead');
  const headRow = el('tr');
  headRow.appendChild(el('th', 'select-col', ''));
  const columns: [string, SortKey | null][] = [
    ['text', null],
    ['label', null],
    ['fluency', 'fluency'],
    ['grammaticality', 'grammaticality'],
    ['alignment', 'alignment'],
    ['LLM', null],
    ['mark', null],
  ];
  for (const [title, key] of columns) {
    const th = el('th', key ? 'sortable' : undefined, title);
    if (key) {
      if (sort === key) th.textContent = `${title} ${dir === 'asc' ? '↑' : '↓'}`;
      th.addEventListener('click', () => void store.setSort(key));
    }
    headRow.appendChild(th);
  }
  head.appendChild(headRow);
  table.appendChild(head);

  const body = el('tbody');
  for (const row of rows) {
    const tr = el('tr');
    tr.dataset.id = row.id;
    if (selection.has(row.id)) tr.classList.add('selected');

    const selectCell = el('td', 'select-col');
    const checkbox = el('input') as HTMLInputElement;
    checkbox.type = 'checkbox';
    checkbox.checked = selection.has(row.id);
    checkbox.addEventListener('change', () => void store.toggleSelected(row.id));
    selectCell.appendChild(checkbox);
    tr.appendChild(selectCell);

    const textCell = el('td', 'text');
    textCell.appendChild(highlightedText(row.text, row.highlights));
    if (row.transforms.length) {
      textCell.appendChild(el('div', 'transforms', row.transforms.join(', ')));
    }
    tr.appendChild(textCell);
    tr.appendChild(el('td', 'label', row.label));
    for (const metric of METRICS) tr.appendChild(metricCell(row, metric));
    tr.appendChild(verdictCell(row));
    tr.appendChild(markCell(store, row));
    body.appendChild(tr);
  }
  table.appendChild(body);
  container.appendChild(table);

  const pages = Math.max(1, Math.ceil(total / pageSize));
  const pager = el('div', 'pager');
  const prev = el('button', undefined, '‹ prev') as HTMLButtonElement;
  prev.disabled = page <= 1;
  prev.addEventListener('click', () => void store.setPage(page - 1));
  const next = el('button', undefined, 'next ›') as HTMLButtonElement;
  next.disabled = page >= pages;
  next.addEventListener('click', () => void store.setPage(page + 1));
  pager.append(prev, el('span', 'page-info', `page ${page} / ${pages} · ${total} rows`), next);
  container.appendChild(pager);
}

function groupCard(store: Store, group: GroupSummary): HTMLElement {
  const card = el('div', 'group-card');
  card.dataset.key = group.key;
  card.appendChild(el('h3', 'group-title', group.display));
  card.appendChild(
    el('div', 'group-counter', `${group.inspected} inspected / ${group.high_quality} high quality`),
  );
  card.appendChild(el('div', 'group-size', `${group.member_count} members`));

  const examples = el('ul', 'examples');
  for (const example of group.examples) {
    const item = el('li');
    item.appendChild(highlightedText(example.text, example.highlights));
    examples.appendChild(item);
  }
  card.appendChild(examples);

  const actions = el('div', 'group-actions');
  const viewOthers = el('button', 'view-others', 'view others') as HTMLButtonElement;
  viewOthers.addEventListener('click', () => {
    void store.setFilter(`${group.kind}:${group.value}`);
  });
  const markAll = el('button', 'mark-all', 'mark all high quality') as HTMLButtonElement;
  markAll.addEventListener('click', () => {
    const message = `Mark all ${group.member_count} members of "${group.display}" as high quality?`;
    if (window.confirm(message)) {
      void store.batchMark(group.kind, group.value, 'high_quality');
    }
  });
  actions.append(viewOthers, markAll);
  card.appendChild(actions);
  return card;
}

export function renderPanes(store: Store, transformPane: HTMLElement, featurePane: HTMLElement): void {
  const panes: [HTMLElement, GroupSummary[], string][] = [
    [transformPane, store.state.transformGroups, 'Transformation provenance'],
    [featurePane, store.state.featureGroups, 'Feature provenance'],
  ];
  for (const [pane, groups, title] of panes) {
    pane.replaceChildren();
    pane.appendChild(el('h2', undefined, title));
    if (!store.state.selection.size) {
      pane.appendChild(el('p', 'hint', 'Select rows to see their provenance groups.'));
      continue;
    }
    if (!groups.length) {
      pane.appendChild(el('p', 'hint', 'No groups for this selection.'));
      continue;
    }
    for (const group of groups) pane.appendChild(groupCard(store, group));
  }
}

export function renderToolbar(store: Store, container: HTMLElement): void {
  container.replaceChildren();
  const stats = store.state.stats;
  const label = stats
    ? `${stats.inspected} inspected · ${stats.high_quality} accepted of ${stats.generated} generated`
    : '';
  container.appendChild(el('span', 'stats', label));

  const undo = el('button', 'undo', 'undo') as HTMLButtonElement;
  undo.addEventListener('click', () => void store.undo());
  container.appendChild(undo);

  const guidance = el('button', 'guidance', 'ask LLM about page') as HTMLButtonElement;
  guidance.addEventListener('click', () => {
    const ids = store.state.rows.map((row) => row.id);
    void store.requestGuidance(ids);
  });
  container.appendChild(guidance);

  const exportLink = el('a', 'export', 'export accepted') as HTMLAnchorElement;
  exportLink.href = store.api.exportUrl();
  exportLink.setAttribute('download', 'accepted.jsonl');
  container.appendChild(exportLink);

  if (store.state.lastError) {
    container.appendChild(el('span', 'error', store.state.lastError));
  }
}

/** View state for the inspection screen.
 *
 * The selection is the only implicit input to the provenance panes: changing
 * it bumps a sequence number, and pane responses that come back for an older
 * sequence are discarded, so the panes always match the latest acknowledged
 * selection. Mutations render optimistically and are reconciled against the
 * server response; when the server disagrees (conflict, unknown id), the
 * server state wins via a full refresh.
 */

import { ApiClient, ApiError } from './api.js';
import type {
  GroupSummary,
  GuidanceEntry,
  MarkStateValue,
  Meta,
  Row,
  SortKey,
  Stats,
  TablePage,
} from './types.js';

export interface ViewState {
  filter: string;
  sort: SortKey;
  dir: 'asc' | 'desc';
  page: number;
  pageSize: number;
  rows: Row[];
  total: number;
  selection: Set<string>;
  transformGroups: GroupSummary[];
  featureGroups: GroupSummary[];
  stats: Stats | null;
  meta: Meta | null;
  guidance: Map<string, GuidanceEntry>;
  lastError: string | null;
}

type Listener = (store: Store) => void;

export class Store {
  readonly state: ViewState = {
    filter: '',
    sort: 'id',
    dir: 'asc',
    page: 1,
    pageSize: 50,
    rows: [],
    total: 0,
    selection: new Set(),
    transformGroups: [],
    featureGroups: [],
    stats: null,
    meta: null,
    guidance: new Map(),
    lastError: null,
  };

  private paneSeq = 0;
  private listeners: Listener[] = [];
  private pending: Promise<unknown> = Promise.resolve();

  constructor(readonly api: ApiClient) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this);
  }

  /** Serialize mutations so optimistic updates reconcile in order. */
  private enqueue<T>(action: () => Promise<T>): Promise<T> {
    const next = this.pending.then(action, action);
    this.pending = next.catch(() => undefined);
    return next;
  }

  async init(): Promise<void> {
    this.state.meta = await this.api.fetchMeta();
    this.state.stats = this.state.meta.counts;
    await this.loadTable();
  }

  async loadTable(): Promise<void> {
    const page = await this.api.fetchTable({
      filter: this.state.filter,
      sort: this.state.sort,
      dir: this.state.dir,
      page: this.state.page,
      pageSize: this.state.pageSize,
    });
    this.applyPage(page);
    this.emit();
  }

  private applyPage(page: TablePage): void {
    this.state.rows = page.rows;
    this.state.total = page.total;
    this.state.page = page.page;
  }

  async setSort(sort: SortKey): Promise<void> {
    if (this.state.sort === sort) {
      this.state.dir = this.state.dir === 'asc' ? 'desc' : 'asc';
    } else {
      this.state.sort = sort;
      this.state.dir = 'asc';
    }
    this.state.page = 1;
    await this.loadTable();
  }

  async setFilter(filter: string): Promise<void> {
    this.state.filter = filter;
    this.state.page = 1;
    await this.loadTable();
  }

  async setPage(page: number): Promise<void> {
    this.state.page = Math.max(1, page);
    await this.loadTable();
  }

  /** Replace the selection and refresh both panes; stale replies are dropped. */
  async select(ids: Iterable<string>): Promise<void> {
    this.state.selection = new Set(ids);
    this.emit();
    await this.refreshPanes();
  }

  async toggleSelected(id: string): Promise<void> {
    if (this.state.selection.has(id)) {
      this.state.selection.delete(id);
    } else {
      this.state.selection.add(id);
    }
    this.emit();
    await this.refreshPanes();
  }

  async refreshPanes(): Promise<void> {
    const seq = ++this.paneSeq;
    const ids = [...this.state.selection];
    const [transforms, features] = await Promise.all([
      this.api.fetchGroups(ids, 'transform'),
      this.api.fetchGroups(ids, 'feature'),
    ]);
    if (seq !== this.paneSeq) return; // a newer selection already answered
    this.state.transformGroups = transforms;
    this.state.featureGroups = features;
    this.emit();
  }

  /** Optimistic single mark, reconciled against the server's stats. */
  mark(id: string, state: MarkStateValue): Promise<void> {
    const row = this.state.rows.find((r) => r.id === id);
    const before = row?.mark;
    if (row) {
      row.mark = state;
      this.emit();
    }
    return this.enqueue(async () => {
      try {
        const reply = await this.api.postMark(id, state);
        this.state.stats = reply.stats;
      } catch (error) {
        if (row && before) row.mark = before; // server wins
        this.recordError(error);
      }
      await this.refreshAfterMutation();
    });
  }

  batchMark(kind: 'transform' | 'feature', value: string, state: MarkStateValue): Promise<number> {
    return this.enqueue(async () => {
      let count = 0;
      try {
        const reply = await this.api.postBatchMark(kind, value, state);
        this.state.stats = reply.stats;
        count = reply.count;
      } catch (error) {
        this.recordError(error);
      }
      await this.refreshAfterMutation();
      return count;
    });
  }

  undo(): Promise<void> {
    return this.enqueue(async () => {
      try {
        const reply = await this.api.postUndo();
        this.state.stats = reply.stats;
      } catch (error) {
        this.recordError(error);
      }
      await this.refreshAfterMutation();
    });
  }

  async requestGuidance(ids: string[]): Promise<void> {
    const entries = await this.api.fetchGuidance(ids);
    for (const entry of entries) {
      this.state.guidance.set(entry.id, entry);
    }
    await this.loadTable(); // verdicts now appear in the row payloads
  }

  private async refreshAfterMutation(): Promise<void> {
    await this.loadTable();
    await this.refreshPanes();
  }

  private recordError(error: unknown): void {
    this.state.lastError =
      error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
    this.emit();
  }
}

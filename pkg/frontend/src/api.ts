/** Thin fetch client for the inspection API. The UI never computes counts or
 * statistics itself; every number rendered comes from these endpoints. */

import type {
  GroupKind,
  GroupSummary,
  GuidanceEntry,
  MarkStateValue,
  Meta,
  SortKey,
  Stats,
  TablePage,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<never> {
  let code = 'internal';
  let message = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body?.error) {
      code = body.error.code;
      message = body.error.message;
    }
  } catch {
    // non-JSON error body; keep the defaults
  }
  throw new ApiError(code, message, response.status);
}

let requestCounter = 0;

/** Fresh id per logical mutation so server-side retry dedup can kick in. */
export function nextRequestId(): string {
  requestCounter += 1;
  return `ui-${Date.now()}-${requestCounter}`;
}

export interface TableQuery {
  filter?: string;
  sort?: SortKey;
  dir?: 'asc' | 'desc';
  page?: number;
  pageSize?: number;
}

export class ApiClient {
  constructor(readonly baseUrl: string = '') {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) await parseError(response);
    return response.json() as Promise<T>;
  }

  private async post<T>(path: string, body: unknown, requestId?: string): Promise<T> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (requestId) headers['X-Request-Id'] = requestId;
    const response = await fetch(this.baseUrl + path, {
      method: 'POST',
      headers,
      body: JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return response.json() as Promise<T>;
  }

  fetchTable(query: TableQuery = {}): Promise<TablePage> {
    const params = new URLSearchParams();
    if (query.filter) params.set('filter', query.filter);
    if (query.sort) params.set('sort', query.sort);
    if (query.dir) params.set('dir', query.dir);
    if (query.page) params.set('page', String(query.page));
    if (query.pageSize) params.set('page_size', String(query.pageSize));
    const suffix = params.toString() ? `?${params}` : '';
    return this.get<TablePage>(`/api/dataset${suffix}`);
  }

  fetchGroups(ids: string[], kind: GroupKind): Promise<GroupSummary[]> {
    return this.post<{ groups: GroupSummary[] }>('/api/selection/groups', { ids, kind }).then(
      (body) => body.groups,
    );
  }

  postMark(id: string, state: MarkStateValue, requestId = nextRequestId()): Promise<{ stats: Stats }> {
    return this.post('/api/marks', { id, state }, requestId);
  }

  postBatchMark(
    kind: GroupKind,
    value: string,
    state: MarkStateValue,
    scope: 'all_members' | 'filtered_members' = 'all_members',
    requestId = nextRequestId(),
  ): Promise<{ count: number; stats: Stats }> {
    return this.post('/api/marks/batch', { key: { kind, value }, state, scope }, requestId);
  }

  postUndo(requestId = nextRequestId()): Promise<{ undone_seq: number; stats: Stats }> {
    return this.post('/api/undo', {}, requestId);
  }

  fetchGuidance(ids: string[]): Promise<GuidanceEntry[]> {
    return this.post<{ verdicts: GuidanceEntry[] }>('/api/guidance', { ids }).then(
      (body) => body.verdicts,
    );
  }

  fetchStats(): Promise<Stats> {
    return this.get<Stats>('/api/stats');
  }

  fetchMeta(): Promise<Meta> {
    return this.get<Meta>('/api/meta');
  }

  exportUrl(): string {
    return `${this.baseUrl}/api/export`;
  }

  async fetchExport(): Promise<string> {
    const response = await fetch(this.exportUrl());
    if (!response.ok) await parseError(response);
    return response.text();
  }
}

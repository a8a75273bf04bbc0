import type { AnnotationRecord, EvalItem } from '../src/types.js';

export const preferenceItem: EvalItem = {
  item_id: 'preference-DRUG001',
  task: 'PREFERENCE',
  entry_id: 'DRUG001',
  payload: {
    summaries: {
      '1': 'The study examined dosing with a meal. Exposure rose. Food is advised.',
      '2': 'AUC increased by 21% and Cmax by 31% with food. Tmax moved to 5 hours.',
      '3': 'A high-fat meal raised AUC by 21% and Cmax by 31%. Take with food.',
    },
  },
};

export const pairwiseItem: EvalItem = {
  item_id: 'pairwise-DRUG001',
  task: 'PAIRWISE',
  entry_id: 'DRUG001',
  payload: {
    reference: 'Food increased the AUC by 21% and Cmax by 31%. Take with food.',
    summaries: {
      A: 'A high-fat meal raised AUC by 21% and Cmax by 31%. Take with food.',
      B: 'Food raised exposure moderately. Dosing with food is recommended.',
    },
  },
};

export const consistencyItem: EvalItem = {
  item_id: 'consistency-DRUG001',
  task: 'CONSISTENCY',
  entry_id: 'DRUG001',
  payload: {
    reference: 'Food increased the AUC by 21% and Cmax by 31%. Take with food.',
    candidate: 'A high-fat meal raised AUC by 21% and Cmax by 31%. Take with food.',
  },
};

interface StubOptions {
  alwaysDuplicate?: boolean;
  unauthorized?: boolean;
}

export interface StubServer {
  fetchImpl: typeof fetch;
  posts: AnnotationRecord[];
  requests: string[];
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

/** In-memory stand-in for the annotation service. */
export function makeStubServer(items: EvalItem[], options: StubOptions = {}): StubServer {
  const submitted = new Set<string>();
  const posts: AnnotationRecord[] = [];
  const requests: string[] = [];

  const fetchImpl = (async (url: RequestInfo | URL, init?: RequestInit) => {
    const target = String(url);
    requests.push(target);
    if (options.unauthorized) {
      return jsonResponse(401, { error: 'BadToken', message: 'token does not match assessor' });
    }
    if (target.includes('/api/tasks/') && target.includes('/pending')) {
      const pending = items.filter((item) => {
        return ![...submitted].some((key) => key.endsWith(`|${item.item_id}`));
      });
      return jsonResponse(200, pending);
    }
    if (target.endsWith('/api/annotations')) {
      const record = JSON.parse(String(init?.body)) as AnnotationRecord;
      posts.push(record);
      const key = `${record.assessor_id}|${record.item_id}`;
      if (options.alwaysDuplicate || submitted.has(key)) {
        return jsonResponse(409, { accepted: false, reason: 'first write wins' });
      }
      const selection = record.selection;
      if (
        typeof selection === 'object' &&
        selection.most.some((label) => selection.least.includes(label))
      ) {
        return jsonResponse(400, {
          error: 'ValidationError',
          message: "'most' and 'least' must be disjoint",
        });
      }
      submitted.add(key);
      return jsonResponse(200, { accepted: true, reason: null, timestamp: 't' });
    }
    if (target.includes('/api/progress')) {
      return jsonResponse(200, { assessor_id: 'p1', tasks: {} });
    }
    return jsonResponse(404, { error: 'Unknown', message: target });
  }) as typeof fetch;

  return { fetchImpl, posts, requests };
}

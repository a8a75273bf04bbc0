/** Application shell: login, queue progression, submission, shortcuts. */

import {
  ApiClient,
  SessionExpired,
  clearSession,
  loadSession,
  saveSession,
  type Session,
} from './api.js';
import { renderEmptyQueue, renderError, renderItem } from './render.js';
import { SelectionState } from './state.js';
import type { EvalItem, TaskId } from './types.js';

export class App {
  private client: ApiClient | null = null;
  private queue: EvalItem[] = [];
  private state: SelectionState | null = null;
  private task: TaskId = '1';
  private submitting = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  start(): void {
    const session = loadSession();
    if (session) {
      this.client = new ApiClient(session, this.fetchImpl);
      void this.refresh();
    } else {
      this.showLogin();
    }
    document.addEventListener('keydown', (event) => this.onKey(event));
  }

  /** Re-fetch pending items; the first unannotated item becomes current. */
  async refresh(): Promise<void> {
    if (!this.client) return;
    try {
      this.queue = await this.client.listPending(this.task);
    } catch (error) {
      if (error instanceof SessionExpired) {
        this.showLogin('Session expired. Sign in again.');
        return;
      }
      renderError(this.root, `Could not load items: ${String(error)}`, () => {
        void this.refresh();
      });
      return;
    }
    this.renderCurrent();
  }

  current(): EvalItem | null {
    return this.queue[0] ?? null;
  }

  private renderCurrent(notice: string | null = null): void {
    const item = this.current();
    if (!item) {
      this.state = null;
      renderEmptyQueue(this.root);
      return;
    }
    if (!this.state) {
      this.state = SelectionState.forItem(item);
    }
    renderItem(this.root, item, this.state, { onSubmit: () => void this.submit() }, notice);
  }

  async submit(): Promise<void> {
    const item = this.current();
    if (!item || !this.client || !this.state || this.submitting) return;
    if (!this.state.canSubmit()) {
      this.renderCurrent();
      return;
    }
    this.submitting = true;
    try {
      const result = await this.client.submit({
        assessor_id: loadSession()?.assessorId ?? '',
        item_id: item.item_id,
        selection: this.state.selection(),
        justification: this.state.justification || null,
      });
      if (result.kind === 'accepted') {
        this.queue.shift();
        this.state = null;
        this.renderCurrent();
      } else if (result.kind === 'duplicate') {
        // keep the selection on screen; the server kept the first write
        this.renderCurrent(`Already submitted for this item: ${result.reason}`);
      } else {
        this.renderCurrent(result.message);
      }
    } catch (error) {
      if (error instanceof SessionExpired) {
        this.showLogin('Session expired. Sign in again.');
      } else {
        this.renderCurrent(`Submission failed: ${String(error)}`);
      }
    } finally {
      this.submitting = false;
    }
  }

  private onKey(event: KeyboardEvent): void {
    const target = event.target as HTMLElement | null;
    if (target && (target.tagName === 'TEXTAREA' || target.tagName === 'INPUT')) return;
    const item = this.current();
    if (!item || !this.state) return;
    const shortcuts: Record<string, Record<string, string>> = {
      PAIRWISE: { a: 'A', b: 'B', t: 'TIE' },
      CONSISTENCY: { y: 'YES', n: 'NO' },
    };
    const mapping = shortcuts[item.task];
    const choice = mapping?.[event.key.toLowerCase()];
    if (choice) {
      this.state.setChoice(choice);
      this.renderCurrent();
    } else if (event.key === 'Enter' && this.state.canSubmit()) {
      void this.submit();
    }
  }

  showLogin(banner: string | null = null): void {
    clearSession();
    this.client = null;
    this.queue = [];
    this.state = null;
    this.root.replaceChildren();

    const form = document.createElement('form');
    form.className = 'login';
    form.dataset.role = 'login';
    if (banner) {
      const note = document.createElement('div');
      note.className = 'banner';
      note.dataset.role = 'session-banner';
      note.textContent = banner;
      form.appendChild(note);
    }

    const fields: Array<[string, string, string]> = [
      ['baseUrl', 'Service URL', 'http://127.0.0.1:8800'],
      ['assessorId', 'Assessor id', ''],
      ['token', 'Access token', ''],
    ];
    const inputs: Record<string, HTMLInputElement> = {};
    for (const [name, label, initial] of fields) {
      const wrap = document.createElement('label');
      wrap.textContent = label;
      const input = document.createElement('input');
      input.name = name;
      input.value = initial;
      if (name === 'token') input.type = 'password';
      wrap.appendChild(input);
      form.appendChild(wrap);
      inputs[name] = input;
    }

    const taskWrap = document.createElement('label');
    taskWrap.textContent = 'Task';
    const select = document.createElement('select');
    select.name = 'task';
    for (const [value, label] of [
      ['1', 'Task 1: preference across turns'],
      ['2', 'Task 2: pairwise comparison'],
      ['3', 'Task 3: consistency'],
    ]) {
      const option = document.createElement('option');
      option.value = value as string;
      option.textContent = label as string;
      select.appendChild(option);
    }
    taskWrap.appendChild(select);
    form.appendChild(taskWrap);

    const go = document.createElement('button');
    go.type = 'submit';
    go.textContent = 'Start annotating';
    form.appendChild(go);

    form.addEventListener('submit', (event) => {
      event.preventDefault();
      const session: Session = {
        baseUrl: inputs.baseUrl?.value ?? '',
        assessorId: inputs.assessorId?.value ?? '',
        token: inputs.token?.value ?? '',
      };
      saveSession(session);
      this.task = (select.value as TaskId) ?? '1';
      this.client = new ApiClient(session, this.fetchImpl);
      void this.refresh();
    });

    this.root.appendChild(form);
  }
}

export function mount(root: HTMLElement, fetchImpl: typeof fetch = fetch): App {
  const app = new App(root, fetchImpl);
  app.start();
  return app;
}

/** DOM rendering for the three blinded task kinds.
 *
 * Only payload fields received from the API are ever rendered; origin
 * metadata does not exist client-side, so it cannot leak into the DOM.
 * All text lands via textContent.
 */

import type { EvalItem } from './types.js';
import { PAIRWISE_LABELS, PREFERENCE_LABELS } from './types.js';
import type { SelectionState } from './state.js';

export interface RenderHandlers {
  onSubmit: () => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function textPanel(title: string, body: string, role: string): HTMLElement {
  const panel = el('section', 'panel');
  panel.dataset.role = role;
  panel.appendChild(el('h3', 'panel-title', title));
  panel.appendChild(el('div', 'panel-body', body));
  return panel;
}

function choiceButton(
  label: string,
  choice: string,
  state: SelectionState,
  rerender: () => void,
): HTMLButtonElement {
  const button = el('button', 'choice', label);
  button.type = 'button';
  button.dataset.choice = choice;
  if (state.choice === choice) button.classList.add('selected');
  button.addEventListener('click', () => {
    state.setChoice(choice);
    rerender();
  });
  return button;
}

function renderPreference(
  container: HTMLElement,
  item: EvalItem,
  state: SelectionState,
  rerender: () => void,
): void {
  const row = el('div', 'panel-row');
  for (const label of PREFERENCE_LABELS) {
    const summary = item.payload.summaries?.[label] ?? '';
    const panel = textPanel(`Summary ${label}`, summary, `summary-${label}`);
    const controls = el('div', 'panel-controls');
    const most = el('button', 'toggle', 'Most preferred');
    most.type = 'button';
    most.dataset.action = 'most';
    most.dataset.label = label;
    if (state.most.has(label)) most.classList.add('selected');
    most.addEventListener('click', () => {
      state.toggleMost(label);
      rerender();
    });
    const least = el('button', 'toggle', 'Least preferred');
    least.type = 'button';
    least.dataset.action = 'least';
    least.dataset.label = label;
    if (state.least.has(label)) least.classList.add('selected');
    least.addEventListener('click', () => {
      state.toggleLeast(label);
      rerender();
    });
    controls.append(most, least);
    panel.appendChild(controls);
    row.appendChild(panel);
  }
  container.appendChild(row);
}

function renderPairwise(
  container: HTMLElement,
  item: EvalItem,
  state: SelectionState,
  rerender: () => void,
): void {
  if (item.payload.reference) {
    container.appendChild(textPanel('Reference summary', item.payload.reference, 'reference'));
  }
  const row = el('div', 'panel-row');
  for (const label of PAIRWISE_LABELS) {
    row.appendChild(
      textPanel(`Summary ${label}`, item.payload.summaries?.[label] ?? '', `summary-${label}`),
    );
  }
  container.appendChild(row);
  const choices = el('div', 'choices');
  choices.append(
    choiceButton('A is better (a)', 'A', state, rerender),
    choiceButton('B is better (b)', 'B', state, rerender),
    choiceButton('Equally good (t)', 'TIE', state, rerender),
  );
  container.appendChild(choices);
}

function renderConsistency(
  container: HTMLElement,
  item: EvalItem,
  state: SelectionState,
  rerender: () => void,
): void {
  container.appendChild(
    textPanel('Reference summary', item.payload.reference ?? '', 'reference'),
  );
  container.appendChild(
    textPanel('Model-generated summary', item.payload.candidate ?? '', 'candidate'),
  );
  const choices = el('div', 'choices');
  choices.append(
    choiceButton('Consistent: Yes (y)', 'YES', state, rerender),
    choiceButton('Consistent: No (n)', 'NO', state, rerender),
  );
  container.appendChild(choices);
}

const QUESTIONS: Record<string, string> = {
  PREFERENCE: 'Choose your most (and optionally least) preferred summary or summaries.',
  PAIRWISE: 'Which summary is better?',
  CONSISTENCY: 'Is the model-generated summary factually consistent with the reference?',
};

export function renderItem(
  container: HTMLElement,
  item: EvalItem,
  state: SelectionState,
  handlers: RenderHandlers,
  notice: string | null = null,
): void {
  const rerender = () => renderItem(container, item, state, handlers, null);
  container.replaceChildren();

  const card = el('div', 'item-card');
  card.dataset.itemId = item.item_id;
  card.appendChild(el('h2', 'question', QUESTIONS[item.task] ?? ''));
  card.appendChild(el('div', 'entry', `Drug: ${item.entry_id}`));

  if (item.task === 'PREFERENCE') renderPreference(card, item, state, rerender);
  else if (item.task === 'PAIRWISE') renderPairwise(card, item, state, rerender);
  else renderConsistency(card, item, state, rerender);

  const justification = el('textarea', 'justification');
  justification.dataset.role = 'justification';
  justification.placeholder = 'Optional justification';
  justification.value = state.justification;
  justification.addEventListener('input', () => {
    state.justification = justification.value;
  });
  card.appendChild(justification);

  const hint = state.validationHint();
  const hintNode = el('div', 'hint', hint ?? '');
  hintNode.dataset.role = 'hint';
  if (!hint) hintNode.classList.add('hidden');
  card.appendChild(hintNode);

  if (notice) {
    const noticeNode = el('div', 'notice', notice);
    noticeNode.dataset.role = 'notice';
    card.appendChild(noticeNode);
  }

  const submit = el('button', 'submit', 'Submit');
  submit.type = 'button';
  submit.dataset.role = 'submit';
  submit.disabled = !state.canSubmit();
  submit.addEventListener('click', handlers.onSubmit);
  card.appendChild(submit);

  container.appendChild(card);
}

export function renderEmptyQueue(container: HTMLElement): void {
  container.replaceChildren();
  const done = el('div', 'all-done', 'All done. Nothing pending for this task.');
  done.dataset.role = 'all-done';
  container.appendChild(done);
}

export function renderError(container: HTMLElement, message: string, onRetry: () => void): void {
  container.replaceChildren();
  const box = el('div', 'error-box');
  box.dataset.role = 'error';
  box.appendChild(el('div', 'error-message', message));
  const retry = el('button', 'retry', 'Retry');
  retry.type = 'button';
  retry.dataset.role = 'retry';
  retry.addEventListener('click', onRetry);
  box.appendChild(retry);
  container.appendChild(box);
}

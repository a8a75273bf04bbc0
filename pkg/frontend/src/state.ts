/** Selection state for one item: pure logic, no DOM.
 *
 * Most/least toggles are independent so an overlapping pick is representable;
 * the overlap is reported as a validation hint and blocks submission instead
 * of being silently auto-corrected.
 */

import type { EvalItem, Selection, TaskKind } from './types.js';
import { PREFERENCE_LABELS } from './types.js';

export class SelectionState {
  readonly task: TaskKind;
  readonly most = new Set<string>();
  readonly least = new Set<string>();
  choice: string | null = null;
  justification = '';

  constructor(task: TaskKind) {
    this.task = task;
  }

  static forItem(item: EvalItem): SelectionState {
    return new SelectionState(item.task);
  }

  toggleMost(label: string): void {
    if (this.most.has(label)) {
      this.most.delete(label);
    } else {
      this.most.add(label);
    }
  }

  toggleLeast(label: string): void {
    if (this.least.has(label)) {
      this.least.delete(label);
    } else {
      this.least.add(label);
    }
  }

  setChoice(choice: string): void {
    this.choice = choice;
  }

  overlap(): string[] {
    return [...this.most].filter((label) => this.least.has(label)).sort();
  }

  validationHint(): string | null {
    if (this.task === 'PREFERENCE') {
      if (this.overlap().length > 0) {
        return 'Most and least preferred must not overlap.';
      }
      if (this.most.size === 0) {
        return 'Pick at least one most-preferred summary (least may stay empty).';
      }
      return null;
    }
    if (this.task === 'PAIRWISE') {
      return this.choice === null ? 'Pick A, B, or Tie.' : null;
    }
    return this.choice === null ? 'Pick Yes or No.' : null;
  }

  canSubmit(): boolean {
    return this.validationHint() === null;
  }

  selection(): Selection {
    if (!this.canSubmit()) {
      throw new Error('selection is not submittable');
    }
    if (this.task === 'PREFERENCE') {
      const order = [...PREFERENCE_LABELS] as string[];
      const sorted = (labels: Set<string>) =>
        [...labels].sort((a, b) => order.indexOf(a) - order.indexOf(b));
      return { most: sorted(this.most), least: sorted(this.least) };
    }
    if (this.task === 'PAIRWISE') {
      return this.choice as 'A' | 'B' | 'TIE';
    }
    return this.choice as 'YES' | 'NO';
  }
}

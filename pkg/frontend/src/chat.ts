import type { ApiClient } from './api.js';
import { BusyError, ProviderFailure } from './api.js';
import type { ExerciseEvent, ImprovementArea, RecommendedResource, TurnResult } from './types.js';

const EXERCISE_LABELS: Record<string, string> = {
  fill_in_blank: 'Fill in the blank',
  rewrite: 'Rewrite',
  multiple_choice: 'Multiple choice',
  free_response: 'Free response',
};

/**
 * Chat pane: message list, active-exercise banner, "areas to improve"
 * card with confidence bars, and recommended resource links. All content
 * is rendered verbatim from API responses.
 */
export class ChatScreen {
  private pending = false;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private sessionId: string,
  ) {
    this.root.innerHTML = `
      <div class="chat">
        <div class="exercise-banner" hidden></div>
        <ul class="messages"></ul>
        <div class="analysis-card" hidden></div>
        <div class="toast" hidden></div>
        <form class="composer">
          <input type="text" name="text" autocomplete="off" autofocus />
          <button type="submit">Send</button>
        </form>
      </div>`;
    const form = this.root.querySelector('form.composer') as HTMLFormElement;
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      const input = form.elements.namedItem('text') as HTMLInputElement;
      if (input.value.trim()) void this.send(input.value);
      input.value = '';
    });
  }

  get isPending(): boolean {
    return this.pending;
  }

  async send(text: string): Promise<void> {
    if (this.pending) return; // single in-flight turn, mirroring the 409 contract
    this.pending = true;
    this.setComposerEnabled(false);
    this.appendMessage('learner', text); // optimistic echo
    try {
      const result = await this.api.sendMessage(this.sessionId, text);
      this.renderTurn(result);
    } catch (error) {
      if (error instanceof BusyError) {
        this.showToast('The tutor is still thinking — try again in a moment.');
      } else if (error instanceof ProviderFailure) {
        this.showToast('The tutor is temporarily unavailable.');
      } else {
        throw error;
      }
    } finally {
      this.pending = false;
      this.setComposerEnabled(true);
    }
  }

  renderTurn(result: TurnResult): void {
    this.appendMessage('assistant', result.assistant_reply);
    if (result.exercise_event) this.renderExerciseEvent(result.exercise_event);
    if (result.analysis_event) {
      this.renderAnalysis(result.analysis_event, result.recommended ?? []);
    }
  }

  appendMessage(role: 'learner' | 'assistant', text: string): void {
    const list = this.root.querySelector('ul.messages')!;
    const item = document.createElement('li');
    item.className = `message ${role}`;
    item.textContent = text;
    list.appendChild(item);
  }

  private renderExerciseEvent(event: ExerciseEvent): void {
    const banner = this.root.querySelector('.exercise-banner') as HTMLElement;
    if (event.kind === 'completed') {
      banner.hidden = true;
      banner.innerHTML = '';
      return;
    }
    banner.hidden = false;
    banner.innerHTML = `
      <span class="exercise-type">${EXERCISE_LABELS[event.exercise_type] ?? event.exercise_type}</span>
      <span class="exercise-prompt"></span>`;
    (banner.querySelector('.exercise-prompt') as HTMLElement).textContent = event.prompt;
  }

  private renderAnalysis(areas: ImprovementArea[], resources: RecommendedResource[]): void {
    const card = this.root.querySelector('.analysis-card') as HTMLElement;
    card.hidden = false;
    card.innerHTML = '<h3>Areas to improve</h3>';
    for (const area of areas) {
      const row = document.createElement('div');
      row.className = 'area-row';
      const label = document.createElement('span');
      label.className = 'area-name';
      label.textContent = area.area;
      const bar = document.createElement('div');
      bar.className = 'confidence-bar';
      bar.style.width = `${Math.round(area.confidence * 100)}%`;
      bar.setAttribute('data-confidence', area.confidence.toFixed(2));
      row.append(label, bar);
      card.appendChild(row);
    }
    if (resources.length > 0) {
      const list = document.createElement('ul');
      list.className = 'resources';
      for (const resource of resources) {
        const item = document.createElement('li');
        const link = document.createElement('a');
        link.href = resource.url;
        link.textContent = resource.title;
        link.target = '_blank';
        item.appendChild(link);
        list.appendChild(item);
      }
      card.appendChild(list);
    }
  }

  private setComposerEnabled(enabled: boolean): void {
    const button = this.root.querySelector('form.composer button') as HTMLButtonElement;
    button.disabled = !enabled;
    this.root.querySelector('.chat')!.classList.toggle('pending', !enabled);
  }

  private showToast(message: string): void {
    const toast = this.root.querySelector('.toast') as HTMLElement;
    toast.hidden = false;
    toast.textContent = message;
  }
}

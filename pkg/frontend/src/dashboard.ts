import type { ApiClient } from './api.js';
import type { DashboardData } from './types.js';

const CHART_WIDTH = 600;
const CHART_HEIGHT = 200;
const MIN_LEVEL = 1;
const MAX_LEVEL = 14;

function formatTimestamp(epochSeconds: number): string {
  return new Date(epochSeconds * 1000).toISOString().slice(0, 16).replace('T', ' ');
}

/** Map level-series points onto SVG polyline coordinates. */
export function levelSeriesPoints(series: [number, number][]): string {
  if (series.length === 0) return '';
  const first = series[0][0];
  const last = series[series.length - 1][0];
  const span = last - first || 1;
  return series
    .map(([at, level]) => {
      const x = ((at - first) / span) * CHART_WIDTH;
      const y = CHART_HEIGHT - ((level - MIN_LEVEL) / (MAX_LEVEL - MIN_LEVEL)) * CHART_HEIGHT;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(' ');
}

/**
 * Progress dashboard: level-over-time chart, improvement-area history,
 * and a session list with transcript downloads. Purely presentational;
 * all numbers come from /dashboard and the session endpoints.
 */
export class DashboardScreen {
  constructor(
    private root: HTMLElement,
    private api: ApiClient,
  ) {}

  async load(): Promise<void> {
    const data = await this.api.getDashboard();
    this.render(data);
  }

  render(data: DashboardData): void {
    this.root.innerHTML = `
      <div class="dashboard">
        <section class="level-chart"></section>
        <section class="area-history"></section>
        <section class="stats"></section>
        <section class="sessions"></section>
      </div>`;
    this.renderLevelChart(data.level_series);
    this.renderAreaHistory(data.area_history);
    this.renderStats(data);
  }

  private renderLevelChart(series: [number, number][]): void {
    const section = this.root.querySelector('.level-chart') as HTMLElement;
    section.innerHTML = '<h3>Level over time</h3>';
    if (series.length === 0) {
      const empty = document.createElement('p');
      empty.className = 'empty-state';
      empty.textContent = 'No assessments yet — chat with the tutor to get your first level.';
      section.appendChild(empty);
      return;
    }
    const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
    svg.setAttribute('viewBox', `0 0 ${CHART_WIDTH} ${CHART_HEIGHT}`);
    svg.setAttribute('class', 'level-line');
    const line = document.createElementNS('http://www.w3.org/2000/svg', 'polyline');
    line.setAttribute('points', levelSeriesPoints(series));
    line.setAttribute('fill', 'none');
    line.setAttribute('stroke', '#2d6cdf');
    svg.appendChild(line);
    for (const [at, level] of series) {
      const label = document.createElement('span');
      label.className = 'level-point';
      label.setAttribute('data-level', level.toFixed(1));
      label.textContent = `${formatTimestamp(at)}: ${level.toFixed(1)}`;
      section.appendChild(label);
    }
    section.insertBefore(svg, section.querySelector('.level-point'));
  }

  private renderAreaHistory(history: [number, string, number][]): void {
    const section = this.root.querySelector('.area-history') as HTMLElement;
    section.innerHTML = '<h3>Improvement areas</h3>';
    if (history.length === 0) {
      const empty = document.createElement('p');
      empty.className = 'empty-state';
      empty.textContent = 'No areas detected yet.';
      section.appendChild(empty);
      return;
    }
    const list = document.createElement('ul');
    for (const [at, area, confidence] of history) {
      const item = document.createElement('li');
      item.className = 'area-entry';
      item.textContent = `${formatTimestamp(at)} — ${area} (${confidence.toFixed(2)})`;
      list.appendChild(item);
    }
    section.appendChild(list);
  }

  private renderStats(data: DashboardData): void {
    const section = this.root.querySelector('.stats') as HTMLElement;
    const counts = data.exercise_counts;
    section.innerHTML = `
      <h3>Activity</h3>
      <dl>
        <dt>Sessions</dt><dd class="session-count">${data.session_count}</dd>
        <dt>Exercises issued</dt><dd>${counts.issued + counts.attempted + counts.completed}</dd>
        <dt>Exercises completed</dt><dd>${counts.completed}</dd>
      </dl>`;
  }

  /** Session list with per-session transcript download buttons. */
  renderSessions(sessionIds: string[]): void {
    const section = this.root.querySelector('.sessions') as HTMLElement;
    section.innerHTML = '<h3>Sessions</h3>';
    const list = document.createElement('ul');
    for (const sessionId of sessionIds) {
      const item = document.createElement('li');
      item.className = 'session-entry';
      const label = document.createElement('span');
      label.textContent = sessionId;
      const button = document.createElement('button');
      button.className = 'download-transcript';
      button.textContent = 'Download transcript';
      button.addEventListener('click', () => void this.downloadTranscript(sessionId));
      item.append(label, button);
      list.appendChild(item);
    }
    section.appendChild(list);
  }

  /** Fetch the transcript and hand the unmodified body to the browser. */
  async downloadTranscript(sessionId: string, format: 'json' | 'text' = 'json'): Promise<string> {
    const body = await this.api.downloadTranscript(sessionId, format);
    const type = format === 'json' ? 'application/json' : 'text/plain';
    const blob = new Blob([body], { type });
    const anchor = document.createElement('a');
    anchor.href = URL.createObjectURL(blob);
    anchor.download = `transcript-${sessionId}.${format === 'json' ? 'json' : 'txt'}`;
    anchor.click();
    URL.revokeObjectURL(anchor.href);
    return body;
  }
}

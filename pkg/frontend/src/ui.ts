// DOM layer: renders the latest server snapshot and forwards input.
// Deliberately thin; all decisions happen in state.ts or on the server.

import type { PlayClient, SessionState } from './api.js';
import {
  boardView,
  checkTranscript,
  describeOutcome,
  projectedPayoffs,
  replayPositions,
  validateStake,
} from './state.js';

interface UiRefs {
  root: HTMLElement;
  form: HTMLFormElement;
  board: HTMLElement;
  meters: HTMLElement;
  log: HTMLElement;
  stakeRow: HTMLElement;
  stakeInput: HTMLInputElement;
  stakeButton: HTMLButtonElement;
  quickZero: HTMLButtonElement;
  quickLast: HTMLButtonElement;
  hintToggle: HTMLInputElement;
  hintLabel: HTMLElement;
  message: HTMLElement;
  replayButton: HTMLButtonElement;
}

export class App {
  private state: SessionState | null = null;
  private busy = false;

  constructor(private readonly client: PlayClient, private readonly refs: UiRefs) {}

  bind(): void {
    this.refs.form.addEventListener('submit', (ev) => {
      ev.preventDefault();
      void this.newGame();
    });
    this.refs.stakeButton.addEventListener('click', () => void this.submit());
    this.refs.stakeInput.addEventListener('keydown', (ev) => {
      if (ev.key === 'Enter') {
        ev.preventDefault();
        void this.submit();
      }
    });
    this.refs.quickZero.addEventListener('click', () => {
      this.refs.stakeInput.value = '0';
    });
    this.refs.quickLast.addEventListener('click', () => {
      const history = this.state?.history ?? [];
      const last = history.length ? history[history.length - 1].human_stake : 0;
      this.refs.stakeInput.value = String(last);
    });
    this.refs.hintToggle.addEventListener('change', () => void this.refreshHint());
    this.refs.replayButton.addEventListener('click', () => void this.replay());
    void this.loadOpponents();
  }

  private async loadOpponents(): Promise<void> {
    try {
      const { opponents } = await this.client.listOpponents();
      const select = this.refs.form.elements.namedItem('opponent') as HTMLSelectElement;
      select.innerHTML = '';
      for (const [kind, blurb] of Object.entries(opponents)) {
        const option = document.createElement('option');
        option.value = kind;
        option.textContent = `${kind} - ${blurb}`;
        select.appendChild(option);
      }
    } catch (err) {
      this.showError(err);
    }
  }

  private async newGame(): Promise<void> {
    const data = new FormData(this.refs.form);
    const half = Number(data.get('half') ?? 3);
    const seedRaw = String(data.get('seed') ?? '').trim();
    try {
      this.state = await this.client.createSession({
        trail: [-half, half],
        boundary: 'standard_symmetric',
        start: 0,
        human_side: (data.get('side') as 'mina' | 'maxine') ?? 'mina',
        opponent: String(data.get('opponent') ?? 'nash'),
        ...(seedRaw === '' ? {} : { seed: Number(seedRaw) }),
      });
      this.refs.message.textContent = '';
      this.render();
      void this.refreshHint();
    } catch (err) {
      this.showError(err);
    }
  }

  private async submit(): Promise<void> {
    if (!this.state || this.busy) return;
    const check = validateStake(this.refs.stakeInput.value, this.state.stake_cap);
    if (!check.ok || check.value === undefined) {
      this.refs.message.textContent = check.message ?? 'invalid stake';
      return;
    }
    this.busy = true;
    this.refs.stakeButton.disabled = true;
    try {
      this.state = await this.client.submitStake(this.state.id, check.value);
      this.refs.message.textContent = '';
      this.render();
      void this.refreshHint();
    } catch (err) {
      this.showError(err);
    } finally {
      this.busy = false;
      this.refs.stakeButton.disabled = false;
    }
  }

  private async refreshHint(): Promise<void> {
    if (!this.state) return;
    if (!this.refs.hintToggle.checked) {
      this.refs.hintLabel.textContent = '';
      return;
    }
    try {
      const withHint = await this.client.getState(this.state.id, true);
      this.refs.hintLabel.textContent =
        withHint.hint == null ? 'no hint available' : `equilibrium hint: ${withHint.hint.toPrecision(4)}`;
    } catch (err) {
      this.showError(err);
    }
  }

  private async replay(): Promise<void> {
    if (!this.state) return;
    const positions = replayPositions(this.state);
    for (let i = 0; i < positions.length; i += 1) {
      this.renderBoardAt(positions[i]);
      await new Promise((resolve) => setTimeout(resolve, 250));
    }
    this.render();
  }

  private showError(err: unknown): void {
    this.refs.message.textContent = err instanceof Error ? err.message : String(err);
  }

  render(): void {
    const state = this.state;
    if (!state) return;
    this.renderBoardAt(state.vertex);
    this.renderMeters();
    this.renderLog();
    const done = state.status === 'finished';
    this.refs.stakeRow.style.display = done ? 'none' : '';
    if (done) {
      const check = checkTranscript(state);
      const verdict = check.consistent
        ? 'transcript checks out'
        : `transcript problems: ${check.problems.join('; ')}`;
      this.refs.message.textContent = `${describeOutcome(state)}; ${verdict}`;
    }
  }

  private renderBoardAt(counter: number): void {
    const state = this.state;
    if (!state) return;
    const view = boardView(state);
    this.refs.board.innerHTML = '';
    for (const v of view.vertices) {
      const cell = document.createElement('div');
      cell.className = 'cell';
      if (v === view.leftGoal || v === view.rightGoal) cell.classList.add('goal');
      if (v === counter) cell.classList.add('counter');
      const label = document.createElement('span');
      label.textContent = String(v);
      cell.appendChild(label);
      const stakes = document.createElement('small');
      const h = view.lastHumanStakes.get(v);
      const b = view.lastBotStakes.get(v);
      stakes.textContent =
        h === undefined && b === undefined
          ? ''
          : `you ${h?.toPrecision(2) ?? '-'} / bot ${b?.toPrecision(2) ?? '-'}`;
      cell.appendChild(stakes);
      this.refs.board.appendChild(cell);
    }
  }

  private renderMeters(): void {
    const state = this.state;
    if (!state) return;
    const projected = projectedPayoffs(state);
    const rows = [
      `turn ${state.turn}; you play ${state.human_side} (${boardView(state).humanDirection})`,
      `your costs so far: ${state.costs.human.toPrecision(6)}`,
      `bot costs so far: ${state.costs.bot.toPrecision(6)}`,
      `your payoff if the counter exits left: ${projected.ifMinaWins.toPrecision(6)}`,
      `your payoff if the counter exits right: ${projected.ifMaxineWins.toPrecision(6)}`,
    ];
    if (state.payoffs) {
      rows.push(`final: you ${state.payoffs.human.toPrecision(6)}, bot ${state.payoffs.bot.toPrecision(6)}`);
    }
    this.refs.meters.innerHTML = '';
    for (const text of rows) {
      const div = document.createElement('div');
      div.textContent = text;
      this.refs.meters.appendChild(div);
    }
  }

  private renderLog(): void {
    const state = this.state;
    if (!state) return;
    this.refs.log.innerHTML = '';
    for (const entry of state.history) {
      const li = document.createElement('li');
      li.textContent =
        `turn ${entry.turn}: you ${entry.human_stake.toPrecision(3)}, ` +
        `bot ${entry.bot_stake.toPrecision(3)}, ${entry.winner} moved, ` +
        `counter at ${entry.vertex}`;
      this.refs.log.appendChild(li);
    }
  }
}

export function collectRefs(root: Document): UiRefs {
  const byId = <T extends HTMLElement>(id: string): T => {
    const el = root.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el as T;
  };
  return {
    root: byId('app'),
    form: byId<HTMLFormElement>('new-game'),
    board: byId('board'),
    meters: byId('meters'),
    log: byId('log'),
    stakeRow: byId('stake-row'),
    stakeInput: byId<HTMLInputElement>('stake'),
    stakeButton: byId<HTMLButtonElement>('submit-stake'),
    quickZero: byId<HTMLButtonElement>('quick-zero'),
    quickLast: byId<HTMLButtonElement>('quick-last'),
    hintToggle: byId<HTMLInputElement>('hint-toggle'),
    hintLabel: byId('hint-label'),
    message: byId('message'),
    replayButton: byId<HTMLButtonElement>('replay'),
  };
}

// Pure view-model helpers: everything here is a function of the latest
// server snapshot. No game logic lives in the client beyond non-negativity
// checks on the stake input.

import type { SessionState, TurnEntry } from './api.js';

export interface BoardView {
  vertices: number[];
  counter: number;
  leftGoal: number;
  rightGoal: number;
  humanDirection: 'left' | 'right';
  lastHumanStakes: Map<number, number>;
  lastBotStakes: Map<number, number>;
}

export function boardView(state: SessionState): BoardView {
  const [lo, hi] = state.trail;
  const vertices: number[] = [];
  for (let v = lo; v <= hi; v += 1) vertices.push(v);
  const lastHuman = new Map<number, number>();
  const lastBot = new Map<number, number>();
  let at = state.start;
  for (const entry of state.history) {
    lastHuman.set(at, entry.human_stake);
    lastBot.set(at, entry.bot_stake);
    at = entry.vertex;
  }
  return {
    vertices,
    counter: state.vertex,
    leftGoal: lo,
    rightGoal: hi,
    humanDirection: state.human_side === 'mina' ? 'left' : 'right',
    lastHumanStakes: lastHuman,
    lastBotStakes: lastBot,
  };
}

// Replay of a transcript: the position sequence reconstructed move by move.
export function replayPositions(state: SessionState): number[] {
  const positions = [state.start];
  let at = state.start;
  for (const entry of state.history) {
    at += entry.winner === 'maxine' ? 1 : -1;
    positions.push(at);
  }
  return positions;
}

export interface TranscriptCheck {
  consistent: boolean;
  problems: string[];
}

// The transcript is trusted only after these identities hold: recomputed
// positions match the reported vertices, costs equal stake sums, and for
// finished games payoff + costs equals the terminal receipt.
export function checkTranscript(state: SessionState, epsilon = 1e-9): TranscriptCheck {
  const problems: string[] = [];
  const positions = replayPositions(state);
  state.history.forEach((entry, i) => {
    if (positions[i + 1] !== entry.vertex) {
      problems.push(`turn ${entry.turn}: vertex ${entry.vertex} != replayed ${positions[i + 1]}`);
    }
  });
  if (positions[positions.length - 1] !== state.vertex) {
    problems.push(`final vertex ${state.vertex} != replayed ${positions[positions.length - 1]}`);
  }
  const humanTotal = state.history.reduce((acc, e) => acc + e.human_stake, 0);
  const botTotal = state.history.reduce((acc, e) => acc + e.bot_stake, 0);
  if (Math.abs(humanTotal - state.costs.human) > epsilon) {
    problems.push(`human costs ${state.costs.human} != stake sum ${humanTotal}`);
  }
  if (Math.abs(botTotal - state.costs.bot) > epsilon) {
    problems.push(`bot costs ${state.costs.bot} != stake sum ${botTotal}`);
  }
  if (state.status === 'finished' && state.payoffs) {
    const human = state.payoffs.human + humanTotal - state.payoffs.human_receipt;
    const bot = state.payoffs.bot + botTotal - state.payoffs.bot_receipt;
    if (Math.abs(human) > epsilon) {
      problems.push(`human payoff accounting off by ${human}`);
    }
    if (Math.abs(bot) > epsilon) {
      problems.push(`bot payoff accounting off by ${bot}`);
    }
  }
  return { consistent: problems.length === 0, problems };
}

// Receipts the human would collect at each outcome, net of sunk costs so far.
export interface ProjectedPayoffs {
  ifMinaWins: number;
  ifMaxineWins: number;
}

export function projectedPayoffs(state: SessionState): ProjectedPayoffs {
  const b = state.boundary;
  const mina = state.human_side === 'mina';
  return {
    ifMinaWins: (mina ? b.n_left : b.m_left) - state.costs.human,
    ifMaxineWins: (mina ? b.n_right : b.m_right) - state.costs.human,
  };
}

export interface StakeValidation {
  ok: boolean;
  message?: string;
}

// The client validates non-negativity (and the advertised cap) only;
// everything else is the server's call.
export function validateStake(raw: string, cap: number): StakeValidation & { value?: number } {
  const value = Number(raw);
  if (raw.trim() === '' || Number.isNaN(value)) {
    return { ok: false, message: 'enter a number' };
  }
  if (value < 0) {
    return { ok: false, message: 'stake must be non-negative' };
  }
  if (value > cap) {
    return { ok: false, message: `stake exceeds the session cap ${cap}` };
  }
  return { ok: true, value };
}

export function describeOutcome(state: SessionState): string {
  if (state.status !== 'finished' || !state.terminal) return 'game in progress';
  const humanWon =
    (state.terminal === 'mina_win') === (state.human_side === 'mina');
  const side = state.terminal === 'mina_win' ? 'left' : 'right';
  return `${humanWon ? 'you win' : 'the bot wins'} (counter escaped ${side})`;
}

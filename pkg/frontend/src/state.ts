// Client state: the last fetched service version plus any in-flight label
// post.  The UI is a pure function of this record; a failed post rolls the
// optimistic label back.

import type { ComponentInfo, FrequencyEntry, Label } from './types.js';

export interface AppState {
  version: number;
  components: ComponentInfo[];
  frequencies: FrequencyEntry[];
  selected: number | null;
  pendingLabel: { index: number; previous: Label } | null;
  error: string | null;
}

export function initialState(): AppState {
  return {
    version: -1,
    components: [],
    frequencies: [],
    selected: null,
    pendingLabel: null,
    error: null,
  };
}

export function applyFetched(
  state: AppState,
  version: number,
  components: ComponentInfo[],
  frequencies: FrequencyEntry[],
): AppState {
  const selected =
    state.selected !== null && state.selected < components.length
      ? state.selected
      : components.length
        ? 0
        : null;
  return { ...state, version, components, frequencies, selected, error: null };
}

/** Optimistically apply a label while the POST is in flight. */
export function beginLabel(state: AppState, index: number, label: Label): AppState {
  const target = state.components.find((c) => c.index === index);
  if (!target || state.pendingLabel) {
    return state;
  }
  const components = state.components.map((c) =>
    c.index === index ? { ...c, label, label_source: 'Human' as const } : c,
  );
  return {
    ...state,
    components,
    pendingLabel: { index, previous: target.label },
  };
}

/** Adopt the authoritative result of a successful POST. */
export function commitLabel(
  state: AppState,
  version: number,
  component: ComponentInfo,
  frequencies: FrequencyEntry[],
): AppState {
  const components = state.components.map((c) =>
    c.index === component.index ? component : c,
  );
  return { ...state, version, components, frequencies, pendingLabel: null };
}

/** Roll the optimistic label back after a failed POST. */
export function rollbackLabel(state: AppState, message: string): AppState {
  if (!state.pendingLabel) {
    return { ...state, error: message };
  }
  const { index, previous } = state.pendingLabel;
  const components = state.components.map((c) =>
    c.index === index ? { ...c, label: previous } : c,
  );
  return { ...state, components, pendingLabel: null, error: message };
}

export function signalRows(state: AppState): number[] {
  return state.components
    .filter((c) => c.label !== 'Noise' && c.kept)
    .map((c) => c.index);
}

// DOM wiring: fetch the session, render the component list and the four
// diagnostic panels, post label changes, and keep the summary in sync with
// the service version returned by each response.

import { ApiClient, ApiError } from './api.js';
import {
  eigenvalueBarsSvg,
  modulus,
  overlaySvg,
  phasePortraitSvg,
  realPart,
  seriesChartSvg,
  strideForViewport,
} from './plots.js';
import {
  applyFetched,
  beginLabel,
  commitLabel,
  initialState,
  rollbackLabel,
  type AppState,
} from './state.js';
import { LABELS, type ComponentSeriesPayload, type Label } from './types.js';

const api = new ApiClient('');
let state: AppState = initialState();
let sessionLength = 0;
const seriesCache = new Map<number, ComponentSeriesPayload>();
const PANEL_WIDTH_PX = 640;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function setBanner(message: string | null): void {
  const banner = el('banner');
  banner.textContent = message ?? '';
  banner.classList.toggle('hidden', message === null);
}

async function refreshAll(): Promise<void> {
  try {
    const [components, reconstruction] = await Promise.all([
      api.components(),
      api.reconstruction(),
    ]);
    state = applyFetched(
      state,
      reconstruction.version,
      components.components,
      reconstruction.frequencies,
    );
    renderComponentList();
    renderSummary(reconstruction.shat.samples, reconstruction.source.samples);
    await renderPanels();
    setBanner(null);
  } catch (err) {
    setBanner(`service unreachable: ${String(err)}`);
  }
}

function renderComponentList(): void {
  const list = el('component-list');
  list.innerHTML = '';
  for (const comp of state.components) {
    const row = document.createElement('div');
    row.className = 'component-row';
    if (!comp.kept) row.classList.add('dropped');
    if (comp.index === state.selected) row.classList.add('selected');
    const cyclesText = comp.cycles === null ? '-' : comp.cycles.toFixed(5);
    row.innerHTML =
      `<span class="comp-id">#${comp.index}</span>` +
      `<span>|&lambda;|=${comp.abs_eigval.toFixed(3)}</span>` +
      `<span>${cyclesText}</span>` +
      `<span class="label-tag label-${comp.label.toLowerCase()}">${comp.label}</span>`;
    row.addEventListener('click', () => {
      state = { ...state, selected: comp.index };
      renderComponentList();
      void renderPanels();
    });
    const controls = document.createElement('span');
    controls.className = 'label-controls';
    for (const label of LABELS) {
      const button = document.createElement('button');
      button.textContent = label[0];
      button.title = label;
      button.disabled = comp.label === label;
      button.addEventListener('click', (evt) => {
        evt.stopPropagation();
        void postLabel(comp.index, label);
      });
      controls.appendChild(button);
    }
    row.appendChild(controls);
    list.appendChild(row);
  }
}

async function postLabel(index: number, label: Label): Promise<void> {
  state = beginLabel(state, index, label);
  renderComponentList();
  try {
    const result = await api.setLabel(index, label, state.version);
    state = commitLabel(state, result.version, result.component, result.frequencies);
    const reconstruction = await api.reconstruction();
    state = applyFetched(
      state,
      reconstruction.version,
      state.components,
      reconstruction.frequencies,
    );
    renderComponentList();
    renderSummary(reconstruction.shat.samples, reconstruction.source.samples);
    setBanner(null);
  } catch (err) {
    const reason =
      err instanceof ApiError && err.status === 409
        ? 'stale session version; refetching'
        : String(err);
    state = rollbackLabel(state, reason);
    renderComponentList();
    if (err instanceof ApiError && err.status === 409) {
      await refreshAll();
    } else {
      setBanner(reason);
    }
  }
}

async function renderPanels(): Promise<void> {
  const index = state.selected;
  const panels = el('panels');
  if (index === null) {
    panels.innerHTML = '<p>no components</p>';
    return;
  }
  let payload = seriesCache.get(index);
  if (!payload || payload.version !== state.version) {
    const stride = strideForViewport(sessionLength, PANEL_WIDTH_PX);
    payload = await api.componentSeries(index, stride);
    seriesCache.set(index, payload);
  }
  const comp = state.components.find((c) => c.index === index);
  if (!comp) return;
  panels.innerHTML =
    phasePortraitSvg(payload.z, payload.modulus_mean, payload.modulus_std) +
    seriesChartSvg(modulus(payload.z), { title: 'Modulus |Z_k|' }) +
    seriesChartSvg(payload.phase, {
      title: 'Unwrapped phase',
      markers: payload.wrap_positions,
      cssClass: 'phase-line',
    }) +
    seriesChartSvg(realPart(payload.series.samples), { title: 'Back-mapped Re f(k)' });
}

function renderSummary(shat: [number, number][], source: [number, number][]): void {
  const freqList = el('frequency-list');
  freqList.innerHTML = state.frequencies.length
    ? state.frequencies
        .map(
          (entry) =>
            `<li>${entry.cycles.toFixed(6)} cycles ` +
            `<small>rows ${entry.rows.join(', ')}${entry.paired ? '' : ' (unpaired)'}</small></li>`,
        )
        .join('')
    : '<li>none</li>';
  el('summary-plots').innerHTML =
    eigenvalueBarsSvg(
      state.components.map((c) => c.abs_eigval),
      0.8,
    ) + overlaySvg(realPart(source), realPart(shat), 'Source vs recovered');
}

async function boot(): Promise<void> {
  try {
    const session = await api.session();
    sessionLength = session.length;
    el('session-meta').textContent =
      `session ${session.id} | d=${session.embedding.d} mbar=${session.embedding.mbar} ` +
      `| rank ${session.retained_rank} | m=${session.length}`;
    await refreshAll();
  } catch (err) {
    setBanner(`service unreachable: ${String(err)}`);
  }
}

void boot();

import { HttpApi, latestOnly } from "./api.js";
import { DetailPanel, Legend, RecommendationsPanel, SearchPanel, Toast } from "./panels.js";
import { ScatterView } from "./scatter.js";
import { MapViewState, colorFor } from "./state.js";
import type { ApiClient, Verdict } from "./types.js";

const SEARCH_LIMIT = 20;

export interface App {
  state: MapViewState;
  scatter: ScatterView;
  search: SearchPanel;
  detail: DetailPanel;
  recommendations: RecommendationsPanel;
  toast: Toast;
  loadMap(): Promise<void>;
  selectPaper(docId: string): Promise<void>;
  runSearch(text: string): Promise<void>;
  ratePaper(docId: string, verdict: Verdict): Promise<void>;
  refreshRecommendations(): Promise<void>;
}

export function createApp(root: HTMLElement, api: ApiClient): App {
  root.classList.add("litatlas");
  const mapPane = document.createElement("div");
  mapPane.className = "map-pane";
  const canvas = document.createElement("canvas");
  canvas.className = "map-canvas";
  const tooltip = document.createElement("div");
  tooltip.className = "map-tooltip";
  tooltip.hidden = true;
  const emptyNote = document.createElement("p");
  emptyNote.className = "map-empty";
  emptyNote.textContent = "No documents in this snapshot yet.";
  emptyNote.hidden = true;
  const errorNote = document.createElement("div");
  errorNote.className = "map-error";
  errorNote.hidden = true;
  const errorText = document.createElement("span");
  const retry = document.createElement("button");
  retry.textContent = "Retry";
  errorNote.append(errorText, retry);
  mapPane.append(canvas, tooltip, emptyNote, errorNote);

  const side = document.createElement("aside");
  side.className = "side-pane";
  root.append(mapPane, side);

  const state = new MapViewState();
  const scatter = new ScatterView(canvas, state);
  const legend = new Legend(mapPane);
  const search = new SearchPanel(side);
  const detail = new DetailPanel(side);
  const recommendations = new RecommendationsPanel(side);
  const toast = new Toast(root);

  const loadDetail = latestOnly((docId: string) => api.getPaper(docId));
  const loadRecommendations = latestOnly(() => api.getRecommendations());
  const loadSearch = latestOnly((text: string) => api.search(text, SEARCH_LIMIT));

  async function loadMap(): Promise<void> {
    errorNote.hidden = true;
    try {
      const points = await api.getMap();
      scatter.setData(points);
      emptyNote.hidden = points.length > 0;
      legend.show(state.categories(), (c) => colorFor(c, state.categories()));
    } catch (err) {
      errorText.textContent = `Could not load the map: ${String(err)}. `;
      errorNote.hidden = false;
    }
  }

  async function selectPaper(docId: string): Promise<void> {
    if (state.byId.has(docId)) {
      state.select(docId);
      scatter.render();
    }
    const result = await loadDetail(docId);
    if (result) detail.show(result, state.ratings.get(docId));
  }

  async function refreshRecommendations(): Promise<void> {
    const result = await loadRecommendations();
    if (result) recommendations.show(result.recommendations);
  }

  async function ratePaper(docId: string, verdict: Verdict): Promise<void> {
    try {
      await api.rate(docId, verdict);
    } catch (err) {
      toast.show(`Rating failed: ${String(err)}`);
      return; // prior UI state stays put
    }
    state.setRating(docId, verdict);
    scatter.render();
    if (state.selectedDocId === docId) {
      const current = await loadDetail(docId);
      if (current) detail.show(current, verdict);
    }
    await refreshRecommendations();
  }

  async function runSearch(text: string): Promise<void> {
    const result = await loadSearch(text);
    if (!result) return; // a newer search superseded this one
    search.showResults(result, SEARCH_LIMIT);
    state.setHighlights(result.results.map((r) => r.doc_id));
    scatter.render();
  }

  scatter.onSelect = (docId) => {
    if (docId) void selectPaper(docId);
  };
  scatter.onHover = (docId) => {
    if (docId && state.byId.has(docId)) {
      tooltip.textContent = state.byId.get(docId)!.title;
      tooltip.hidden = false;
      const [sx, sy] = scatter.toScreen(state.byId.get(docId)!);
      tooltip.style.left = `${sx + 10}px`;
      tooltip.style.top = `${sy + 10}px`;
    } else {
      tooltip.hidden = true;
    }
  };
  search.onSubmit = (text) => void runSearch(text);
  search.onPick = (docId) => void selectPaper(docId);
  detail.onPick = (docId) => void selectPaper(docId);
  detail.onRate = (docId, verdict) => void ratePaper(docId, verdict);
  recommendations.onPick = (docId) => void selectPaper(docId);
  retry.addEventListener("click", () => void loadMap());

  return {
    state,
    scatter,
    search,
    detail,
    recommendations,
    toast,
    loadMap,
    selectPaper,
    runSearch,
    ratePaper,
    refreshRecommendations,
  };
}

// browser bootstrap; test environments create the app themselves
const mount = typeof document !== "undefined" ? document.getElementById("litatlas-root") : null;
if (mount) {
  const app = createApp(mount, new HttpApi());
  void app.loadMap().then(() => app.refreshRecommendations());
}

import type { PaperDetail, PaperSummary, SearchResponse, Verdict } from "./types.js";

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

function summaryLine(paper: PaperSummary): string {
  const year = paper.year != null ? ` (${paper.year})` : "";
  return `${paper.title}${year}`;
}

function scoredRow(
  paper: PaperSummary,
  onPick: (docId: string) => void,
  className: string,
): HTMLLIElement {
  const row = el("li", className);
  row.dataset.docId = paper.doc_id;
  if (paper.score !== undefined) {
    row.append(el("span", "score", paper.score.toFixed(3)));
  }
  const link = el("a", "pick", summaryLine(paper));
  link.href = "#";
  link.addEventListener("click", (ev) => {
    ev.preventDefault();
    onPick(paper.doc_id);
  });
  row.append(link);
  return row;
}

/** Transient error notice; failures never wipe existing panel content. */
export class Toast {
  readonly root: HTMLDivElement;

  constructor(parent: HTMLElement) {
    this.root = el("div", "toast");
    this.root.hidden = true;
    parent.append(this.root);
  }

  show(message: string): void {
    this.root.textContent = message;
    this.root.hidden = false;
    setTimeout(() => {
      this.root.hidden = true;
    }, 4000);
  }
}

export class SearchPanel {
  readonly root: HTMLElement;
  readonly input: HTMLTextAreaElement;
  readonly button: HTMLButtonElement;
  readonly status: HTMLParagraphElement;
  readonly list: HTMLUListElement;
  onSubmit: (text: string) => void = () => {};
  onPick: (docId: string) => void = () => {};

  constructor(parent: HTMLElement) {
    this.root = el("section", "panel search-panel");
    this.root.append(el("h2", undefined, "Search"));
    this.input = el("textarea", "search-input");
    this.input.placeholder = "Keywords, or paste a whole abstract";
    this.button = el("button", "search-button", "Search");
    this.status = el("p", "search-status", "");
    this.list = el("ul", "search-results");
    const form = el("form", "search-form");
    form.append(this.input, this.button);
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const text = this.input.value.trim();
      if (text) this.onSubmit(text);
    });
    this.root.append(form, this.status, this.list);
    parent.append(this.root);
  }

  showResults(response: SearchResponse, limit: number): void {
    this.list.replaceChildren();
    if (!response.results.length) {
      this.status.textContent = "No matches.";
      return;
    }
    const shown = response.results.length;
    this.status.textContent =
      response.total > shown
        ? `Showing ${shown} of ${response.total} matches.`
        : `${shown} match${shown === 1 ? "" : "es"}.`;
    for (const paper of response.results) {
      this.list.append(scoredRow(paper, (d) => this.onPick(d), "search-result"));
    }
  }
}

export class DetailPanel {
  readonly root: HTMLElement;
  readonly body: HTMLDivElement;
  onPick: (docId: string) => void = () => {};
  onRate: (docId: string, verdict: Verdict) => void = () => {};

  constructor(parent: HTMLElement) {
    this.root = el("section", "panel detail-panel");
    this.root.append(el("h2", undefined, "Article"));
    this.body = el("div", "detail-body");
    this.body.append(el("p", "detail-hint", "Click a point on the map to inspect a paper."));
    this.root.append(this.body);
    parent.append(this.root);
  }

  show(detail: PaperDetail, verdict: Verdict | undefined): void {
    const { paper, similar } = detail;
    this.body.replaceChildren();
    this.body.append(el("h3", "detail-title", paper.title));
    const meta = [paper.venue, paper.published_year, paper.authors.join(", ")]
      .filter((part) => part !== null && part !== "")
      .join(" · ");
    this.body.append(el("p", "detail-meta", String(meta)));
    this.body.append(el("p", "detail-abstract", paper.abstract_text));

    const ratings = el("div", "rating-buttons");
    for (const choice of ["relevant", "irrelevant"] as const) {
      const button = el(
        "button",
        `rate-${choice}${verdict === choice ? " active" : ""}`,
        choice === "relevant" ? "Relevant" : "Irrelevant",
      );
      button.addEventListener("click", () => this.onRate(paper.doc_id, choice));
      ratings.append(button);
    }
    this.body.append(ratings);

    this.body.append(el("h4", undefined, "Similar articles"));
    const list = el("ul", "similar-list");
    for (const s of similar) {
      list.append(scoredRow(s, (d) => this.onPick(d), "similar-item"));
    }
    this.body.append(list);
  }
}

export class RecommendationsPanel {
  readonly root: HTMLElement;
  readonly hint: HTMLParagraphElement;
  readonly list: HTMLUListElement;
  onPick: (docId: string) => void = () => {};

  constructor(parent: HTMLElement) {
    this.root = el("section", "panel recs-panel");
    this.root.append(el("h2", undefined, "Recommended for you"));
    this.hint = el(
      "p",
      "recs-hint",
      "Mark a few papers as relevant and suggestions will appear here.",
    );
    this.list = el("ul", "recs-list");
    this.root.append(this.hint, this.list);
    parent.append(this.root);
  }

  show(recommendations: PaperSummary[]): void {
    this.list.replaceChildren();
    this.hint.hidden = recommendations.length > 0;
    for (const paper of recommendations) {
      this.list.append(scoredRow(paper, (d) => this.onPick(d), "rec-item"));
    }
  }
}

export class Legend {
  readonly root: HTMLDivElement;

  constructor(parent: HTMLElement) {
    this.root = el("div", "legend");
    parent.append(this.root);
  }

  show(categories: string[], colorOf: (category: string) => string): void {
    this.root.replaceChildren();
    for (const category of categories) {
      const item = el("span", "legend-item", category);
      const swatch = el("i", "legend-swatch");
      swatch.style.background = colorOf(category);
      item.prepend(swatch);
      this.root.append(item);
    }
  }
}

import type {
  DatasetDetail,
  DatasetSummary,
  QueryResult,
  RelatedEntry,
  Rule,
  SearchResponse,
  SimilarEntry,
  TermJson,
} from "./types.js";
import type { Crumb, Route, RuleSortKey } from "./state.js";

export interface Handlers {
  navigate(hash: string, label?: string): void;
  submitSearch(q: string, category: string): void;
  runQuery(text: string): void;
  retry(): void;
}

type Doc = Document;

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Doc,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function navButton(doc: Doc, handlers: Handlers, label: string, hash: string,
                   className = "link"): HTMLButtonElement {
  const button = el(doc, "button", className, label);
  button.addEventListener("click", () => handlers.navigate(hash, label));
  return button;
}

export function renderShell(
  doc: Doc,
  route: Route,
  breadcrumb: Crumb[],
  handlers: Handlers,
  content: HTMLElement,
): HTMLElement {
  const root = el(doc, "div", "shell");
  const nav = el(doc, "nav", "topnav");
  nav.appendChild(navButton(doc, handlers, "Search", "#/", "navlink"));
  nav.appendChild(navButton(doc, handlers, "Rules", "#/rules?sort=pca_confidence&dir=desc", "navlink"));
  nav.appendChild(navButton(doc, handlers, "Query", "#/query", "navlink"));
  root.appendChild(nav);

  if (breadcrumb.length > 0) {
    const trail = el(doc, "div", "breadcrumb");
    trail.appendChild(el(doc, "span", "crumb-intro", "Visited:"));
    breadcrumb.forEach((crumb, i) => {
      if (i > 0) trail.appendChild(el(doc, "span", "crumb-sep", ">"));
      trail.appendChild(navButton(doc, handlers, crumb.label, crumb.hash, "crumb"));
    });
    root.appendChild(trail);
  }
  content.classList.add("view", `view-${route.view}`);
  root.appendChild(content);
  return root;
}

export function renderError(doc: Doc, message: string,
                            handlers: Handlers): HTMLElement {
  const box = el(doc, "div", "error-banner");
  box.appendChild(el(doc, "span", "error-text", `Request failed: ${message}`));
  const retry = el(doc, "button", "retry", "Retry");
  retry.addEventListener("click", () => handlers.retry());
  box.appendChild(retry);
  return box;
}

export function renderLoading(doc: Doc): HTMLElement {
  return el(doc, "div", "loading", "Loading...");
}

// --- search -----------------------------------------------------------

export function renderSearch(
  doc: Doc,
  route: Extract<Route, { view: "search" }>,
  response: SearchResponse | null,
  categories: string[],
  handlers: Handlers,
): HTMLElement {
  const view = el(doc, "div");
  view.appendChild(el(doc, "h1", "title", "Dataset search"));

  const form = el(doc, "form", "search-form");
  const input = el(doc, "input", "search-input");
  input.type = "search";
  input.name = "q";
  input.placeholder = "Search titles, keywords, variables";
  input.value = route.q;
  const select = el(doc, "select", "category-select");
  const anyOption = el(doc, "option", undefined, "All categories");
  anyOption.value = "";
  select.appendChild(anyOption);
  for (const category of categories) {
    const option = el(doc, "option", undefined, category);
    option.value = category;
    if (category === route.category) option.selected = true;
    select.appendChild(option);
  }
  const submit = el(doc, "button", "search-submit", "Search");
  submit.type = "submit";
  form.appendChild(input);
  form.appendChild(select);
  form.appendChild(submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    handlers.submitSearch(input.value, select.value);
  });
  view.appendChild(form);

  if (!response) {
    view.appendChild(renderLoading(doc));
    return view;
  }

  view.appendChild(el(doc, "p", "result-count",
    `${response.total} dataset${response.total === 1 ? "" : "s"}`));
  const list = el(doc, "ul", "result-list");
  for (const item of response.items) {
    list.appendChild(renderSummaryCard(doc, item, handlers));
  }
  view.appendChild(list);

  const pages = Math.max(1, Math.ceil(response.total / response.page_size));
  if (pages > 1) {
    const pager = el(doc, "div", "pager");
    for (let page = 1; page <= pages; page += 1) {
      const target = formatSearchHash(route.q, route.category, page);
      const button = navButton(doc, handlers, String(page), target, "page-link");
      if (page === response.page) button.classList.add("current");
      pager.appendChild(button);
    }
    view.appendChild(pager);
  }
  return view;
}

function formatSearchHash(q: string, category: string, page: number): string {
  const params = new URLSearchParams();
  if (q) params.set("q", q);
  if (category) params.set("category", category);
  if (page > 1) params.set("page", String(page));
  const text = params.toString();
  return text ? `#/search?${text}` : "#/";
}

function renderSummaryCard(doc: Doc, item: DatasetSummary,
                           handlers: Handlers): HTMLElement {
  const card = el(doc, "li", "dataset-card");
  const title = navButton(doc, handlers, item.title_en || item.id,
                          `#/dataset/${encodeURIComponent(item.id)}`,
                          "dataset-link");
  card.appendChild(title);
  card.appendChild(el(doc, "div", "subtitle", item.title_nl));
  const badges = el(doc, "div", "badges");
  for (const category of item.categories) {
    badges.appendChild(el(doc, "span", "badge", category));
  }
  card.appendChild(badges);
  card.appendChild(el(doc, "div", "counts",
    `${item.keyword_count} keywords, ${item.variable_count} variables`));
  return card;
}

// --- dataset detail ------------------------------------------------------

export function renderDetail(
  doc: Doc,
  detail: DatasetDetail,
  chip: { kind: "keyword" | "variable"; value: string } | undefined,
  similar: SimilarEntry[] | null | "unavailable",
  handlers: Handlers,
): HTMLElement {
  const view = el(doc, "div");
  view.appendChild(el(doc, "h1", "title", detail.title_en || detail.id));
  view.appendChild(el(doc, "div", "subtitle", detail.title_nl));

  const badges = el(doc, "div", "badges");
  for (const category of detail.categories) {
    badges.appendChild(el(doc, "span", "badge", category));
  }
  view.appendChild(badges);
  view.appendChild(el(doc, "p", "description", detail.description_en));

  const facts = el(doc, "dl", "facts");
  const pairs: Array<[string, string]> = [
    ["Issued", detail.issued || "unknown"],
    ["Publisher", detail.publisher || "unknown"],
    ["Landing page", detail.landing_page || ""],
  ];
  for (const [label, value] of pairs) {
    facts.appendChild(el(doc, "dt", undefined, label));
    facts.appendChild(el(doc, "dd", undefined, value));
  }
  view.appendChild(facts);

  view.appendChild(el(doc, "h2", undefined, "Keywords"));
  const keywordRow = el(doc, "div", "chip-row chip-row-keywords");
  for (const keyword of detail.keywords) {
    keywordRow.appendChild(renderChip(doc, detail.id, "keyword", keyword,
                                      chip, handlers));
  }
  view.appendChild(keywordRow);

  view.appendChild(el(doc, "h2", undefined, "Variables"));
  const variableRow = el(doc, "div", "chip-row chip-row-variables");
  for (const variable of detail.variables) {
    const chipEl = renderChip(doc, detail.id, "variable", variable.name,
                              chip, handlers);
    chipEl.title = variable.label;
    variableRow.appendChild(chipEl);
  }
  view.appendChild(variableRow);

  view.appendChild(el(doc, "h2", undefined,
    chip ? `Related through ${chip.kind} "${chip.value}"` : "Related datasets"));
  const related = chip
    ? detail.related.filter((r) =>
        (chip.kind === "keyword" ? r.shared_keywords : r.shared_variables)
          .includes(chip.value))
    : detail.related;
  view.appendChild(renderRelatedList(doc, related, handlers));

  view.appendChild(el(doc, "h2", undefined, "Similar datasets"));
  if (similar === "unavailable") {
    view.appendChild(el(doc, "p", "similar-unavailable",
                        "embeddings unavailable"));
  } else if (similar === null) {
    view.appendChild(renderLoading(doc));
  } else {
    const list = el(doc, "ul", "similar-list");
    for (const entry of similar) {
      const item = el(doc, "li", "similar-item");
      const label = entry.title_en || entry.id || entry.node;
      if (entry.id) {
        item.appendChild(navButton(doc, handlers, label,
          `#/dataset/${encodeURIComponent(entry.id)}`, "dataset-link"));
      } else {
        item.appendChild(el(doc, "span", undefined, label));
      }
      item.appendChild(el(doc, "span", "score", entry.score.toFixed(3)));
      list.appendChild(item);
    }
    view.appendChild(list);
  }
  return view;
}

function renderChip(
  doc: Doc,
  datasetId: string,
  kind: "keyword" | "variable",
  value: string,
  active: { kind: string; value: string } | undefined,
  handlers: Handlers,
): HTMLButtonElement {
  const hash = `#/dataset/${encodeURIComponent(datasetId)}/${kind}/` +
    encodeURIComponent(value);
  const chip = el(doc, "button", "chip", value);
  if (active && active.kind === kind && active.value === value) {
    chip.classList.add("active");
  }
  chip.addEventListener("click", () => handlers.navigate(hash, value));
  return chip;
}

function renderRelatedList(doc: Doc, related: RelatedEntry[],
                           handlers: Handlers): HTMLElement {
  const list = el(doc, "ul", "related-list");
  if (related.length === 0) {
    list.appendChild(el(doc, "li", "related-empty", "No related datasets."));
    return list;
  }
  for (const entry of related) {
    const item = el(doc, "li", "related-item");
    item.appendChild(navButton(doc, handlers, entry.title_en || entry.id,
      `#/dataset/${encodeURIComponent(entry.id)}`, "dataset-link"));
    const shared: string[] = [];
    if (entry.shared_keywords.length) {
      shared.push(`keywords: ${entry.shared_keywords.join(", ")}`);
    }
    if (entry.shared_variables.length) {
      shared.push(`variables: ${entry.shared_variables.join(", ")}`);
    }
    item.appendChild(el(doc, "span", "shared-items", shared.join(" | ")));
    list.appendChild(item);
  }
  return list;
}

// --- rules ------------------------------------------------------------------

const RULE_COLUMNS: Array<[RuleSortKey | "text", string]> = [
  ["text", "Rule"],
  ["support", "Support"],
  ["head_coverage", "Head coverage"],
  ["std_confidence", "Std confidence"],
  ["pca_confidence", "PCA confidence"],
];

export function renderRules(
  doc: Doc,
  rules: Rule[],
  sort: RuleSortKey,
  dir: "asc" | "desc",
  handlers: Handlers,
): HTMLElement {
  const view = el(doc, "div");
  view.appendChild(el(doc, "h1", "title", "Mined rules"));
  if (rules.length === 0) {
    view.appendChild(el(doc, "p", "empty-state",
      "No rules mined yet. Run the mine stage first."));
    return view;
  }
  const sorted = [...rules].sort((a, b) => {
    const delta = a[sort] < b[sort] ? -1 : a[sort] > b[sort] ? 1 : 0;
    return dir === "asc" ? delta : -delta;
  });
  const table = el(doc, "table", "rules-table");
  const head = el(doc, "tr");
  for (const [key, label] of RULE_COLUMNS) {
    const cell = el(doc, "th");
    if (key === "text") {
      cell.textContent = label;
    } else {
      const nextDir = sort === key && dir === "desc" ? "asc" : "desc";
      const button = navButton(doc, handlers,
        `${label}${sort === key ? (dir === "desc" ? " ▼" : " ▲") : ""}`,
        `#/rules?sort=${key}&dir=${nextDir}`, "sort-link");
      cell.appendChild(button);
    }
    head.appendChild(cell);
  }
  table.appendChild(head);
  for (const rule of sorted) {
    const row = el(doc, "tr", "rule-row");
    row.appendChild(el(doc, "td", "rule-text", rule.text));
    row.appendChild(el(doc, "td", undefined, String(rule.support)));
    row.appendChild(el(doc, "td", undefined, rule.head_coverage.toFixed(3)));
    row.appendChild(el(doc, "td", undefined, rule.std_confidence.toFixed(3)));
    row.appendChild(el(doc, "td", undefined, rule.pca_confidence.toFixed(3)));
    table.appendChild(row);
  }
  view.appendChild(table);
  return view;
}

// --- query ----------------------------------------------------------------------

export const SAVED_QUERIES: Array<{ name: string; body: string }> = [
  {
    name: "Datasets with keyword \"death\"",
    body: JSON.stringify({
      select: ["d"],
      where: [[
        { type: "var", name: "d" },
        { type: "iri", value: "http://www.w3.org/ns/dcat#keyword" },
        { type: "literal", value: "death", lang: "en" },
      ]],
    }, null, 2),
  },
  {
    name: "Dataset pairs sharing a keyword",
    body: JSON.stringify({
      select: ["a", "b"],
      where: [
        [
          { type: "var", name: "a" },
          { type: "iri", value: "http://www.w3.org/ns/dcat#keyword" },
          { type: "var", name: "k" },
        ],
        [
          { type: "var", name: "b" },
          { type: "iri", value: "http://www.w3.org/ns/dcat#keyword" },
          { type: "var", name: "k" },
        ],
      ],
      distinct: [["a", "b"]],
    }, null, 2),
  },
];

function termText(term: TermJson): string {
  if (term.type === "iri") return term.value ?? "";
  if (term.type === "bnode") return `_:${term.value ?? ""}`;
  const lang = term.lang ? `@${term.lang}` : "";
  return `"${term.value ?? ""}"${lang}`;
}

export function renderQuery(
  doc: Doc,
  draft: string,
  result: QueryResult | null,
  error: string | null,
  handlers: Handlers,
): HTMLElement {
  const view = el(doc, "div");
  view.appendChild(el(doc, "h1", "title", "Graph query"));

  const saved = el(doc, "div", "saved-queries");
  for (const entry of SAVED_QUERIES) {
    const button = el(doc, "button", "saved-query", entry.name);
    button.addEventListener("click", () => handlers.runQuery(entry.body));
    saved.appendChild(button);
  }
  view.appendChild(saved);

  const editor = el(doc, "textarea", "query-editor");
  editor.value = draft;
  editor.rows = 12;
  view.appendChild(editor);
  const run = el(doc, "button", "run-query", "Run query");
  run.addEventListener("click", () => handlers.runQuery(editor.value));
  view.appendChild(run);

  if (error) {
    view.appendChild(el(doc, "p", "query-error", error));
  }
  if (result) {
    const meta = result.truncated ? " (truncated)" : "";
    view.appendChild(el(doc, "p", "result-count",
      `${result.rows.length} row${result.rows.length === 1 ? "" : "s"}${meta}`));
    const table = el(doc, "table", "query-results");
    const head = el(doc, "tr");
    for (const name of result.vars) {
      head.appendChild(el(doc, "th", undefined, `?${name}`));
    }
    table.appendChild(head);
    for (const row of result.rows) {
      const tr = el(doc, "tr");
      for (const term of row) {
        tr.appendChild(el(doc, "td", undefined, termText(term)));
      }
      table.appendChild(tr);
    }
    view.appendChild(table);
  }
  return view;
}

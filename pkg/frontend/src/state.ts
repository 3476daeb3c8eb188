// Hash routing and view state. Routes are plain data so transitions and
// breadcrumb rules stay testable without a DOM.

export type RuleSortKey =
  | "pca_confidence"
  | "std_confidence"
  | "head_coverage"
  | "support";

export type Route =
  | { view: "search"; q: string; category: string; page: number }
  | { view: "dataset"; id: string; chip?: { kind: "keyword" | "variable"; value: string } }
  | { view: "rules"; sort: RuleSortKey; dir: "asc" | "desc" }
  | { view: "query" };

export interface Crumb {
  label: string;
  hash: string;
}

export function parseHash(hash: string): Route {
  const raw = hash.replace(/^#/, "");
  const [path, queryText] = raw.split("?", 2);
  const params = new URLSearchParams(queryText ?? "");
  const parts = path.split("/").filter((p) => p.length > 0);

  if (parts.length === 0 || parts[0] === "search") {
    const page = Number(params.get("page") ?? "1");
    return {
      view: "search",
      q: params.get("q") ?? "",
      category: params.get("category") ?? "",
      page: Number.isFinite(page) && page >= 1 ? Math.floor(page) : 1,
    };
  }
  if (parts[0] === "dataset" && parts.length >= 2) {
    const id = decodeURIComponent(parts[1]);
    if (parts.length === 4 && (parts[2] === "keyword" || parts[2] === "variable")) {
      return {
        view: "dataset",
        id,
        chip: { kind: parts[2], value: decodeURIComponent(parts[3]) },
      };
    }
    return { view: "dataset", id };
  }
  if (parts[0] === "rules") {
    const sort = (params.get("sort") ?? "pca_confidence") as RuleSortKey;
    const dir = params.get("dir") === "asc" ? "asc" : "desc";
    return { view: "rules", sort, dir };
  }
  if (parts[0] === "query") {
    return { view: "query" };
  }
  return { view: "search", q: "", category: "", page: 1 };
}

export function formatRoute(route: Route): string {
  switch (route.view) {
    case "search": {
      const params = new URLSearchParams();
      if (route.q) params.set("q", route.q);
      if (route.category) params.set("category", route.category);
      if (route.page > 1) params.set("page", String(route.page));
      const text = params.toString();
      return text ? `#/search?${text}` : "#/";
    }
    case "dataset": {
      const base = `#/dataset/${encodeURIComponent(route.id)}`;
      if (route.chip) {
        return `${base}/${route.chip.kind}/${encodeURIComponent(route.chip.value)}`;
      }
      return base;
    }
    case "rules": {
      const params = new URLSearchParams();
      params.set("sort", route.sort);
      params.set("dir", route.dir);
      return `#/rules?${params.toString()}`;
    }
    case "query":
      return "#/query";
  }
}

/**
 * Route plus the breadcrumb of visited datasets. The breadcrumb grows
 * only through navigation (opening a dataset or clicking a chip) and is
 * cleared whenever a new search is issued.
 */
export class ViewState {
  route: Route = { view: "search", q: "", category: "", page: 1 };
  breadcrumb: Crumb[] = [];

  apply(route: Route, label?: string): void {
    if (route.view === "search") {
      this.breadcrumb = [];
    } else if (route.view === "dataset") {
      const hash = formatRoute(route);
      const fallback = route.chip ? route.chip.value : route.id;
      const crumb = { label: label ?? fallback, hash };
      const last = this.breadcrumb[this.breadcrumb.length - 1];
      if (!last || last.hash !== hash) {
        this.breadcrumb.push(crumb);
      }
    }
    this.route = route;
  }
}

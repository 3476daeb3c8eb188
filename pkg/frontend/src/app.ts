import { ApiClient } from "./api.js";
import { parseHash, formatRoute, Route, ViewState } from "./state.js";
import {
  Handlers,
  renderDetail,
  renderError,
  renderLoading,
  renderQuery,
  renderRules,
  renderSearch,
  renderShell,
  SAVED_QUERIES,
} from "./render.js";
import type { QueryResult } from "./types.js";

interface WindowLike {
  location: { hash: string };
}

/**
 * The application: owns the view state, fetches from the API and renders
 * into the mount point. Route changes cancel in-flight requests.
 */
export class App {
  state = new ViewState();
  private abort: AbortController | null = null;
  private pending = 0;
  private idleWaiters: Array<() => void> = [];
  private currentHash = "";
  private queryDraft: string = SAVED_QUERIES[0]?.body ?? "{}";
  private queryResult: QueryResult | null = null;
  private queryError: string | null = null;
  private knownCategories: string[] = [];

  private handlers: Handlers = {
    navigate: (hash, label) => this.navigate(hash, label),
    submitSearch: (q, category) => {
      const params = new URLSearchParams();
      if (q) params.set("q", q);
      if (category) params.set("category", category);
      const text = params.toString();
      this.navigate(text ? `#/search?${text}` : "#/");
    },
    runQuery: (text) => {
      void this.executeQuery(text);
    },
    retry: () => {
      void this.handleHash(this.currentHash, true);
    },
  };

  constructor(
    private doc: Document,
    private api: ApiClient,
    private mount: HTMLElement,
    private win?: WindowLike,
  ) {}

  /** Resolves once no request or render work is outstanding. */
  idle(): Promise<void> {
    if (this.pending === 0) return Promise.resolve();
    return new Promise((resolve) => this.idleWaiters.push(resolve));
  }

  private beginTask(): void {
    this.pending += 1;
  }

  private endTask(): void {
    this.pending -= 1;
    if (this.pending === 0) {
      const waiters = this.idleWaiters;
      this.idleWaiters = [];
      for (const resolve of waiters) resolve();
    }
  }

  navigate(hash: string, label?: string): void {
    if (this.win) this.win.location.hash = hash;
    void this.handleHash(hash, false, label);
  }

  async handleHash(hash: string, force = false, label?: string): Promise<void> {
    if (!force && hash === this.currentHash) return;
    this.currentHash = hash;
    this.abort?.abort();
    this.abort = new AbortController();
    const signal = this.abort.signal;
    const route = parseHash(hash);
    this.state.apply(route, label);

    this.beginTask();
    try {
      await this.renderRoute(route, signal);
    } catch (err) {
      if (!signal.aborted) {
        this.show(route, renderError(this.doc, describe(err), this.handlers));
      }
    } finally {
      this.endTask();
    }
  }

  private show(route: Route, content: HTMLElement): void {
    const shell = renderShell(this.doc, route, this.state.breadcrumb,
                              this.handlers, content);
    this.mount.replaceChildren(shell);
  }

  private async renderRoute(route: Route, signal: AbortSignal): Promise<void> {
    switch (route.view) {
      case "search": {
        this.show(route, renderSearch(this.doc, route, null,
                                      this.knownCategories, this.handlers));
        const response = await this.api.searchDatasets(
          { q: route.q, category: route.category, page: route.page },
          signal,
        );
        if (signal.aborted) return;
        for (const item of response.items) {
          for (const category of item.categories) {
            if (!this.knownCategories.includes(category)) {
              this.knownCategories.push(category);
            }
          }
        }
        this.knownCategories.sort();
        this.show(route, renderSearch(this.doc, route, response,
                                      this.knownCategories, this.handlers));
        return;
      }
      case "dataset": {
        this.show(route, renderLoading(this.doc));
        const detail = await this.api.datasetDetail(route.id, signal);
        if (signal.aborted) return;
        this.relabelLastCrumb(route, detail.title_en);
        this.show(route, renderDetail(this.doc, detail, route.chip, null,
                                      this.handlers));
        const similar = await this.api.similar(route.id, 5, signal);
        if (signal.aborted) return;
        this.show(route, renderDetail(this.doc, detail, route.chip,
                                      similar === null ? "unavailable" : similar,
                                      this.handlers));
        return;
      }
      case "rules": {
        this.show(route, renderLoading(this.doc));
        const rules = await this.api.rules(signal);
        if (signal.aborted) return;
        this.show(route, renderRules(this.doc, rules, route.sort, route.dir,
                                     this.handlers));
        return;
      }
      case "query": {
        this.show(route, renderQuery(this.doc, this.queryDraft,
                                     this.queryResult, this.queryError,
                                     this.handlers));
        return;
      }
    }
  }

  /** Plain dataset crumbs read better with the dataset title. */
  private relabelLastCrumb(route: Extract<Route, { view: "dataset" }>,
                           title: string): void {
    if (route.chip || !title) return;
    const hash = formatRoute(route);
    const last = this.state.breadcrumb[this.state.breadcrumb.length - 1];
    if (last && last.hash === hash && last.label === route.id) {
      last.label = title;
    }
  }

  private async executeQuery(text: string): Promise<void> {
    this.queryDraft = text;
    this.queryError = null;
    this.queryResult = null;
    this.beginTask();
    try {
      const body = JSON.parse(text) as Parameters<ApiClient["runQuery"]>[0];
      this.queryResult = await this.api.runQuery(body);
    } catch (err) {
      this.queryError = describe(err);
    } finally {
      if (this.state.route.view === "query") {
        this.show(this.state.route,
                  renderQuery(this.doc, this.queryDraft, this.queryResult,
                              this.queryError, this.handlers));
      }
      this.endTask();
    }
  }

  start(): void {
    const hash = this.win?.location.hash || "#/";
    void this.handleHash(hash, true);
  }
}

function describe(err: unknown): string {
  if (err instanceof Error) return err.message;
  return String(err);
}

// Shapes returned by the service API; field names follow the wire format.

export interface DatasetSummary {
  id: string;
  title_en: string;
  title_nl: string;
  categories: string[];
  keyword_count: number;
  variable_count: number;
}

export interface SearchResponse {
  total: number;
  page: number;
  page_size: number;
  items: DatasetSummary[];
}

export interface VariableEntry {
  name: string;
  label: string;
}

export interface RelatedEntry {
  id: string;
  title_en: string;
  shared_variables: string[];
  shared_keywords: string[];
}

export interface DatasetDetail extends DatasetSummary {
  description_en: string;
  issued: string;
  publisher: string;
  landing_page: string;
  keywords: string[];
  variables: VariableEntry[];
  related: RelatedEntry[];
}

export interface Rule {
  text: string;
  body: string[];
  head: string;
  support: number;
  head_coverage: number;
  std_confidence: number;
  pca_confidence: number;
}

export interface SimilarEntry {
  node: string;
  score: number;
  id?: string;
  title_en?: string;
}

export interface TermJson {
  type: "iri" | "literal" | "bnode" | "var";
  value?: string;
  name?: string;
  lang?: string;
  datatype?: string;
}

export interface QueryRequest {
  select?: string[];
  where: TermJson[][][] | TermJson[][];
  distinct?: string[][];
}

export interface QueryResult {
  vars: string[];
  rows: TermJson[][];
  truncated: boolean;
}

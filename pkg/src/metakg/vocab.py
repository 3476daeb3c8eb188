"""Vocabulary constants: DCT, DCAT, RDF, XSD and the configurable local namespace."""

from .rdf import make_iri

DCT = "http://purl.org/dc/terms/"
DCAT = "http://www.w3.org/ns/dcat#"
RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XSD = "http://www.w3.org/2001/XMLSchema#"

DEFAULT_LOCAL_NS = "http://data.example.org/cbs/"

DCT_ISSUED = make_iri(DCT + "issued")
DCT_TITLE = make_iri(DCT + "title")
DCT_DESCRIPTION = make_iri(DCT + "description")
DCT_IDENTIFIER = make_iri(DCT + "identifier")
DCT_LANGUAGE = make_iri(DCT + "language")
DCT_IS_PART_OF = make_iri(DCT + "isPartOf")
DCT_HAS_PART = make_iri(DCT + "hasPart")
DCT_PUBLISHER = make_iri(DCT + "publisher")
DCT_CREATOR = make_iri(DCT + "creator")
DCAT_LANDING_PAGE = make_iri(DCAT + "landingPage")
DCAT_KEYWORD = make_iri(DCAT + "keyword")
DCAT_DATASET = make_iri(DCAT + "Dataset")
DCAT_CATALOG = make_iri(DCAT + "Catalog")
RDF_TYPE = make_iri(RDF_NS + "type")
XSD_DATE = make_iri(XSD + "date")
XSD_STRING = make_iri(XSD + "string")

ALL_CONSTANTS = [
    DCT_ISSUED, DCT_TITLE, DCT_DESCRIPTION, DCT_IDENTIFIER, DCT_LANGUAGE,
    DCT_IS_PART_OF, DCT_HAS_PART, DCT_PUBLISHER, DCT_CREATOR,
    DCAT_LANDING_PAGE, DCAT_KEYWORD, DCAT_DATASET, DCAT_CATALOG,
    RDF_TYPE, XSD_DATE, XSD_STRING,
]


class LocalNamespace:
    """Mints IRIs for datasets, variables, keywords and organizations under
    one configurable base."""

    def __init__(self, base=DEFAULT_LOCAL_NS):
        if not base.endswith("/") and not base.endswith("#"):
            base += "/"
        make_iri(base)
        self.base = base
        self.variable_class = make_iri(base + "Variable")
        self.organization_class = make_iri(base + "Organization")

    def dataset(self, doc_id):
        return make_iri(self.base + "dataset/" + doc_id)

    def catalog(self, name):
        return make_iri(self.base + "catalog/" + name)

    def variable(self, doc_id, var_name):
        return make_iri(self.base + "variable/" + doc_id + "/" + var_name)

    def keyword(self, word):
        return make_iri(self.base + "keyword/" + word)

    def organization(self, name):
        return make_iri(self.base + "organization/" + name)

    def dataset_id(self, iri_value):
        """Inverse of dataset(): the local id, or None for foreign IRIs."""
        prefix = self.base + "dataset/"
        if iri_value.startswith(prefix):
            return iri_value[len(prefix):]
        return None


PREFIXES = {
    DCT: "dct",
    DCAT: "dcat",
    RDF_NS: "rdf",
    XSD: "xsd",
}


def curie(iri_value, local_ns=None):
    """Shorten an IRI with the well-known prefixes, for labels and DOT output."""
    namespaces = dict(PREFIXES)
    if local_ns is not None:
        namespaces[local_ns.base] = "local"
    for ns, prefix in namespaces.items():
        if iri_value.startswith(ns):
            return prefix + ":" + iri_value[len(ns):]
    return iri_value

#!/usr/bin/env python3
"""Generate the fixture corpus: layout-segment files plus the manifest.

The corpus is fully synthetic and deterministic. Each document becomes a
JSON Lines segment file laid out the way a PDF text extractor would report
it (title in a large font, body lines, a variables section), and the
manifest records every file's sha256.

Run from the repository root: python tools/make_fixtures.py
"""

import hashlib
import json
import os

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "fixtures")

ORG_SENTENCE = ("De gegevens zijn verzameld door het Centraal Bureau voor de "
                "Statistiek (CBS). CBS publiceert deze cijfers elk jaar.")


def date_sentence(date_text):
    return f"De cijfers zijn gepubliceerd op {date_text}."


DOCS = [
    {
        "doc_id": "age-at-death",
        "category": "Health and wellbeing",
        "title": "Leeftijd bij overlijden",
        "para1_lines": [
            "Dit bestand bevat gegevens over de leeftijd bij overlijden",
            "van personen. Het bestand beschrijft het overlij-",
            "den per leeftijdsgroep en geslacht sinds 1995.",
        ],
        "date": "12 maart 2019",
        "variables": [
            ("GBAGESLACHT", "geslacht van de persoon"),
            ("OVLLEEFTIJD", "leeftijd bij overlijden in jaren"),
            ("OVLJAAR", "jaar van overlijden"),
        ],
        "split_org_line": True,
        "vertical_note": "CBS Microdata",
    },
    {
        "doc_id": "date-of-death",
        "category": "Health and wellbeing",
        "title": "Datum van overlijden",
        "para1": ("Dit bestand bevat de datum van overlijden van overleden "
                  "personen. Het overlijden is geregistreerd per maand en jaar."),
        "date": "8 april 2019",
        "variables": [
            ("GBAGESLACHT", "geslacht van de persoon"),
            ("OVLDATUM", "datum van overlijden"),
            ("OVLPLAATS", "plaats van overlijden"),
        ],
    },
    {
        "doc_id": "cause-of-death",
        "category": "Health and wellbeing",
        "extra_categories": ["Population"],
        "title": "Doodsoorzaak",
        "para1": ("Dit bestand bevat de belangrijkste doodsoorzaak van "
                  "overleden personen. De oorzaak van overlijden is gecodeerd "
                  "per jaar."),
        "date": "23 mei 2019",
        "variables": [
            ("DOODSOORZ1", "belangrijkste doodsoorzaak"),
            ("DOODSLEEFT", "leeftijd bij overlijden"),
        ],
    },
    {
        "doc_id": "hospital-admissions",
        "category": "Health and wellbeing",
        "title": "Ziekenhuisopnamen",
        "para1": ("Dit bestand bevat gegevens over opnamen in het ziekenhuis. "
                  "Per opname zijn de duur en de diagnose geregistreerd."),
        "date": "1 juni 2019",
        "variables": [
            ("OPNAMEDUUR", "duur van de opname in dagen"),
            ("OPNAMEDIAG", "diagnose bij opname"),
            ("OPNAMESPEC", "specialisme van de opname"),
            ("OPNAMEJAAR", "jaar van de opname"),
            ("OPNAMETYPE", "type van de opname"),
        ],
    },
    {
        "doc_id": "perinatal-care",
        "category": "Health and wellbeing",
        "title": "Perinatale zorg",
        "para1": ("Dit bestand bevat gegevens over perinatale zorg en "
                  "geboorte. Het gewicht bij geboorte is geregistreerd."),
        "date": "17 juli 2019",
        "variables": [
            ("PERIGEWICHT", "gewicht bij geboorte"),
            ("PERIDUUR", "duur van de zwangerschap in weken"),
        ],
    },
    {
        "doc_id": "persons-register",
        "category": "Population",
        "title": "Personenregister",
        "para1": ("Dit register bevat gegevens over alle personen. Per persoon "
                  "zijn geslacht en herkomst geregistreerd."),
        "date": "2 september 2019",
        "variables": [
            ("GBAGEBJAAR", "jaar van geboorte"),
            ("GBAHERKOMST", "land van herkomst"),
            ("GBABURGST", "burgerlijke staat van de persoon"),
        ],
    },
    {
        "doc_id": "households",
        "category": "Population",
        "title": "Huishoudens",
        "para1": ("Dit bestand bevat gegevens over huishoudens. De "
                  "samenstelling en grootte van het huishouden zijn "
                  "geregistreerd."),
        "date": "30 oktober 2019",
        "variables": [
            ("HHSAMENST", "samenstelling van het huishouden"),
            ("HHGROOTTE", "grootte van het huishouden"),
        ],
    },
    {
        "doc_id": "migration",
        "category": "Population",
        "title": "Migratie",
        "para1": ("Dit bestand bevat gegevens over migratie naar en uit "
                  "Nederland. Het land van herkomst is geregistreerd."),
        "date": "15-01-2020",
        "variables": [
            ("MIGLAND", "land van herkomst of bestemming"),
            ("MIGDATUM", "datum van migratie"),
        ],
    },
    {
        "doc_id": "life-events",
        "category": "Population",
        "title": "Levensgebeurtenissen",
        "para1": ("Dit bestand bevat gegevens over levensgebeurtenissen van "
                  "personen. Het type gebeurtenis is geregistreerd per datum."),
        "date": "28-02-2020",
        "variables": [
            ("LEVGEBTYPE", "type van de gebeurtenis"),
            ("LEVGEBDAT", "datum van de gebeurtenis"),
        ],
    },
    {
        "doc_id": "prod-stats-health-welfare",
        "category": "Business",
        "extra_categories": ["Health and wellbeing"],
        "title": "Productiestatistieken gezondheid en welzijn",
        "para1": ("Dit bestand bevat productiestatistieken over gezondheid en "
                  "welzijn. De omzet en kosten van de zorg zijn geregistreerd."),
        "date": "05-03-2020",
        "variables": [
            ("PSOMZET", "omzet van de zorg"),
            ("PSKOSTEN", "kosten van de zorg"),
            ("PSPERSONEEL", "personeel in de zorg"),
        ],
    },
    {
        "doc_id": "business-register",
        "category": "Business",
        "title": "Bedrijvenregister",
        "para1": ("Dit register bevat gegevens over alle bedrijven. De grootte "
                  "van het bedrijf is geregistreerd. Contactpersoon: M. Visser."),
        "date": "19-04-2020",
        "variables": [
            ("BEDRSBI", "activiteit van het bedrijf"),
            ("BEDRGROOTTE", "grootte van het bedrijf"),
        ],
    },
    {
        "doc_id": "bankruptcies",
        "category": "Business",
        "title": "Faillissementen",
        "para1": ("Dit bestand bevat gegevens over faillissementen van "
                  "bedrijven. De datum van het faillissement is geregistreerd."),
        "date": "30-05-2020",
        "variables": [
            ("FAILDATUM", "datum van het faillissement"),
            ("FAILTYPE", "type van het faillissement"),
        ],
    },
    {
        "doc_id": "retail-trade",
        "category": "Business",
        "title": "Detailhandel",
        "para1": ("Dit bestand bevat gegevens over de detailhandel. De omzet "
                  "per vestiging is geregistreerd."),
        "date": "11-06-2020",
        "variables": [
            ("DHOMZET", "omzet van de detailhandel"),
            ("DHVESTIGING", "vestiging van het bedrijf"),
        ],
    },
    {
        "doc_id": "jobs-register",
        "category": "Labour and social security",
        "title": "Banenregister",
        "para1": ("Dit register bevat gegevens over banen. Per baan zijn de "
                  "uren en de sector geregistreerd."),
        "date": "24-07-2020",
        "variables": [
            ("BAANID", "identificatie van de baan"),
            ("BAANUREN", "uren per week"),
            ("BAANSECTOR", "sector van de baan"),
        ],
        "variables_on_page_2": True,
    },
    {
        "doc_id": "income-panel",
        "category": "Labour and social security",
        "extra_categories": ["Business", "Population"],
        "title": "Inkomenspanel",
        "para1": ("Dit bestand bevat gegevens over het inkomen van personen. "
                  "De bron van het inkomen is geregistreerd. "
                  "Contactpersoon: A. Jansen."),
        "date": "2020-08-13",
        "variables": [
            ("BAANID", "identificatie van de baan"),
            ("INKBEDRAG", "bedrag van het inkomen"),
            ("INKBRON", "bron van het inkomen"),
        ],
    },
    {
        "doc_id": "unemployment-benefits",
        "category": "Labour and social security",
        "title": "Werkloosheidsuitkeringen",
        "para1": ("Dit bestand bevat gegevens over uitkeringen bij "
                  "werkloosheid. De duur van de uitkering is geregistreerd."),
        "date": "2020-09-09",
        "variables": [
            ("WWDUUR", "duur van de uitkering in maanden"),
            ("WWBEDRAG", "bedrag van de uitkering"),
        ],
    },
    {
        "doc_id": "pensions",
        "category": "Labour and social security",
        "title": "Pensioenen",
        "para1": ("Dit bestand bevat gegevens over pensioenen. Het bedrag en "
                  "het fonds zijn geregistreerd."),
        "date": "2020-10-21",
        "variables": [
            ("PENSBEDRAG", "bedrag van het pensioen"),
            ("PENSFONDS", "fonds van het pensioen"),
        ],
    },
    {
        "doc_id": "school-enrollment",
        "category": "Education",
        "title": "Schoolinschrijvingen",
        "para1": ("Dit bestand bevat gegevens over inschrijvingen in het "
                  "onderwijs. De soort school en het niveau zijn geregistreerd."),
        "date": "2020-11-05",
        "variables": [
            ("ONDSOORT", "soort school"),
            ("ONDNIVEAU", "niveau van het onderwijs"),
        ],
    },
    {
        "doc_id": "graduates",
        "category": "Education",
        "title": "Afgestudeerden",
        "para1": ("Dit bestand bevat gegevens over afgestudeerden in het "
                  "onderwijs. Het niveau van het diploma is geregistreerd."),
        "date": "2020-12-16",
        "variables": [
            ("DIPLNIVEAU", "niveau van het diploma"),
            ("DIPLRICHTING", "richting van het diploma"),
        ],
    },
    {
        "doc_id": "student-finance",
        "category": "Education",
        "title": "Studiefinanciering",
        "para1": ("Dit bestand bevat gegevens over studiefinanciering voor "
                  "studenten. Het bedrag en de vorm zijn geregistreerd."),
        "date": "2021-01-29",
        "variables": [
            ("SFBEDRAG", "bedrag van de studiefinanciering"),
            ("SFVORM", "vorm van de studiefinanciering"),
        ],
    },
]

BODY_FONT = "Helvetica"
BODY_SIZE = 10.0
TITLE_SIZE = 18.0
HEADER_SIZE = 12.0
LEFT = 72.0
LINE_STEP = 14.0
PARA_STEP = 30.0
CHAR_WIDTH = 5.2


def wrap(text, width=62):
    lines = []
    current = []
    length = 0
    for word in text.split():
        extra = len(word) + (1 if current else 0)
        if length + extra > width and current:
            lines.append(" ".join(current))
            current = [word]
            length = len(word)
        else:
            current.append(word)
            length += extra
    if current:
        lines.append(" ".join(current))
    return lines


class PageWriter:
    def __init__(self):
        self.segments = []
        self.page = 1
        self.y = 760.0

    def new_page(self):
        self.page += 1
        self.y = 760.0

    def _advance(self, height, step):
        self.y -= step
        if self.y < 60:
            self.new_page()

    def segment(self, text, size, x=LEFT, width=None):
        height = size
        seg = {
            "text": text,
            "page": self.page,
            "bbox": [x, round(self.y, 1), round(x + (width or len(text) * CHAR_WIDTH), 1),
                     round(self.y + height, 1)],
            "font_name": BODY_FONT if size == BODY_SIZE else BODY_FONT + "-Bold",
            "font_size": size,
            "direction": "horizontal",
        }
        self.segments.append(seg)
        return seg

    def line(self, text, size=BODY_SIZE, step=LINE_STEP):
        self.segment(text, size)
        self._advance(size, step)

    def split_line(self, part_a, part_b, size=BODY_SIZE, step=LINE_STEP):
        self.segment(part_a, size)
        self.segment(part_b, size, x=LEFT + len(part_a) * CHAR_WIDTH + 8.0)
        self._advance(size, step)

    def gap(self, extra=PARA_STEP - LINE_STEP):
        self.y -= extra
        if self.y < 60:
            self.new_page()


def build_doc_segments(doc):
    w = PageWriter()
    w.line(doc["title"], size=TITLE_SIZE, step=LINE_STEP + TITLE_SIZE - BODY_SIZE)
    w.gap()

    para1_lines = doc.get("para1_lines") or wrap(doc["para1"])
    for text in para1_lines:
        w.line(text)
    w.gap()

    org_lines = wrap(ORG_SENTENCE)
    if doc.get("split_org_line"):
        first = org_lines[0]
        cut = first.find(" door ")
        w.split_line(first[:cut], first[cut + 1:])
        rest = org_lines[1:]
    else:
        w.line(org_lines[0])
        rest = org_lines[1:]
    for text in rest:
        w.line(text)
    w.gap()

    for text in wrap(date_sentence(doc["date"])):
        w.line(text)
    w.gap()

    if doc.get("vertical_note"):
        w.segments.append({
            "text": doc["vertical_note"],
            "page": 1,
            "bbox": [20.0, 300.0, 32.0, 420.0],
            "font_name": BODY_FONT,
            "font_size": 8.0,
            "direction": "vertical",
        })

    if doc.get("variables_on_page_2"):
        w.new_page()
    w.line("Variabelen", size=HEADER_SIZE, step=LINE_STEP + HEADER_SIZE - BODY_SIZE)
    w.gap()
    for name, label in doc["variables"]:
        w.line(f"{name} {label}")
    return w.segments


def main():
    out_dir = os.path.abspath(OUT_DIR)
    seg_dir = os.path.join(out_dir, "segments")
    os.makedirs(seg_dir, exist_ok=True)
    entries = []
    for doc in DOCS:
        segments = build_doc_segments(doc)
        path = os.path.join(seg_dir, f"{doc['doc_id']}.segments.jsonl")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for seg in segments:
                fh.write(json.dumps(seg, ensure_ascii=False) + "\n")
        with open(path, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        entry = {
            "doc_id": doc["doc_id"],
            "category": doc["category"],
            "source": f"segments/{doc['doc_id']}.segments.jsonl",
            "expected_sha256": digest,
        }
        if doc.get("extra_categories"):
            entry["extra_categories"] = doc["extra_categories"]
        entries.append(entry)
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"entries": entries}, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    print(f"wrote {len(entries)} segment files and {manifest_path}")


if __name__ == "__main__":
    main()

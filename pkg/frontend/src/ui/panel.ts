import { extractSnippet } from "../core/snippets.js";
import type { DocumentOut, GeoJsonFeature } from "../core/types.js";

/**
 * Fixed side panel: when a highlighted place is clicked, the documents
 * mentioning it are listed with snippets centered on each matching span.
 */
export class SnippetPanel {
  private title: HTMLElement;
  private body: HTMLElement;

  constructor(container: HTMLElement) {
    container.classList.add("geo-panel");
    this.title = document.createElement("h2");
    this.title.textContent = "Click a highlighted place";
    this.body = document.createElement("div");
    this.body.className = "geo-panel-body";
    container.append(this.title, this.body);
  }

  show(feature: GeoJsonFeature, documents: DocumentOut[]): void {
    const props = feature.properties;
    this.title.textContent = `${props.primary_name} (${props.loc_type})`;
    this.body.replaceChildren();
    const matching = documents.filter((doc) =>
      doc.annotations.some((a) => a.feature_uri === props.uri),
    );
    if (matching.length === 0) {
      this.note("No documents in the current result set mention this place.");
      return;
    }
    for (const doc of matching) {
      const card = document.createElement("div");
      card.className = "geo-doc";
      const head = document.createElement("div");
      head.className = "geo-doc-head";
      head.textContent = `${doc.doc_id}${doc.date ? " · " + doc.date : ""}${
        doc.facet ? " · " + doc.facet : ""
      }`;
      card.appendChild(head);
      for (const annotation of doc.annotations) {
        if (annotation.feature_uri !== props.uri) continue;
        const snippet = extractSnippet(doc.text, annotation.span);
        const line = document.createElement("p");
        line.className = "geo-snippet";
        const mark = document.createElement("mark");
        mark.textContent = snippet.match;
        line.append(snippet.before, mark, snippet.after);
        card.appendChild(line);
      }
      this.body.appendChild(card);
    }
  }

  showUnavailable(): void {
    this.title.textContent = "Feature unavailable";
    this.body.replaceChildren();
    this.note("The clicked feature could not be fetched.");
  }

  private note(text: string): void {
    const p = document.createElement("p");
    p.className = "geo-note";
    p.textContent = text;
    this.body.appendChild(p);
  }
}

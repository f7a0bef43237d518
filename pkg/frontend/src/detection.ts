/**
 * Opt-out-of-sale link detection over a rendered DOM.
 *
 * Mirrors the census scanner's rules: normalized substring matching,
 * valid > ambiguous > none, candidates are anchors with an href plus
 * button-like elements. The shared vector suite in
 * ../tests/detection.test.ts keeps both implementations in agreement.
 */

export type Verdict = "valid" | "ambiguous" | "none";

export interface PhraseSet {
  valid: string[];
  ambiguous: string[];
}

export const DEFAULT_PHRASES: PhraseSet = {
  valid: ["do not sell my personal information"],
  ambiguous: ["california privacy", "consumer privacy", "do not sell"],
};

// Matches the scanner's whitespace model (Python str.split): Unicode
// whitespace plus the information separators and NEL that \s misses.
const WHITESPACE_RUN = /[\s-]+/gu;

export function normalizeText(raw: string): string {
  return raw.toLowerCase().split(WHITESPACE_RUN).filter(Boolean).join(" ");
}

export function classifyPhrase(text: string, phrases: PhraseSet = DEFAULT_PHRASES): Verdict {
  if (phrases.valid.some((p) => text.includes(p))) return "valid";
  if (phrases.ambiguous.some((p) => text.includes(p))) return "ambiguous";
  return "none";
}

const VERDICT_RANK: Record<Verdict, number> = { none: 0, ambiguous: 1, valid: 2 };

export function maxVerdict(a: Verdict, b: Verdict): Verdict {
  return VERDICT_RANK[a] >= VERDICT_RANK[b] ? a : b;
}

export interface PageCandidate {
  elementKind: "anchor" | "button";
  text: string;
  target: string;
  domPath: string;
  classification: Verdict;
  element: Element;
}

export interface PageScan {
  candidates: PageCandidate[];
  pageVerdict: Verdict;
  best: PageCandidate | null;
}

/**
 * Visible-text extraction: like textContent but script/style subtrees
 * contribute nothing and line breaks (br/hr) read as whitespace, the
 * way the rendered label reads to a user.
 */
function visibleText(node: Node): string {
  if (node.nodeType === 3) return node.textContent ?? "";
  if (node.nodeType !== 1) return "";
  const tag = (node as Element).tagName;
  if (tag === "SCRIPT" || tag === "STYLE") return "";
  if (tag === "BR" || tag === "HR") return " ";
  let out = "";
  node.childNodes.forEach((child) => {
    out += visibleText(child);
  });
  return out;
}

function candidateText(element: Element): string {
  const ariaLabel = element.getAttribute("aria-label") ?? "";
  const title = element.getAttribute("title") ?? "";
  return normalizeText(`${visibleText(element)} ${ariaLabel} ${title}`);
}

/** CSS-selector path resolvable with document.querySelector. */
export function domPath(element: Element): string {
  const segments: string[] = [];
  let node: Element | null = element;
  while (node && node.parentElement !== null) {
    const tag = node.tagName.toLowerCase();
    let index = 1;
    let sibling = node.previousElementSibling;
    while (sibling) {
      if (sibling.tagName === node.tagName) index += 1;
      sibling = sibling.previousElementSibling;
    }
    segments.unshift(`${tag}:nth-of-type(${index})`);
    node = node.parentElement;
  }
  if (node) segments.unshift(node.tagName.toLowerCase());
  return segments.join(">");
}

/** Page verdict is the max over candidates; best is the first at max. */
export function assembleScan(candidates: PageCandidate[]): PageScan {
  let pageVerdict: Verdict = "none";
  for (const candidate of candidates) {
    pageVerdict = maxVerdict(pageVerdict, candidate.classification);
  }
  const best =
    pageVerdict === "none"
      ? null
      : candidates.find((c) => c.classification === pageVerdict) ?? null;
  return { candidates, pageVerdict, best };
}

export function scanPage(doc: Document, phrases: PhraseSet = DEFAULT_PHRASES): PageScan {
  const elements = doc.querySelectorAll('a[href], button, [role="button"]');
  const candidates: PageCandidate[] = [];
  elements.forEach((element) => {
    const isAnchor = element.tagName === "A" && element.hasAttribute("href");
    const text = candidateText(element);
    candidates.push({
      elementKind: isAnchor ? "anchor" : "button",
      text,
      target: isAnchor ? element.getAttribute("href") ?? "" : "",
      domPath: domPath(element),
      classification: classifyPhrase(text, phrases),
      element,
    });
  });
  return assembleScan(candidates);
}

import { PageScan } from "./detection.js";

/** The standardized banner shown on pages with an opt-out link. */
export interface BannerModel {
  severity: "red_valid" | "yellow_ambiguous";
  message: string;
  actionLabel: string;
  targetDomPath: string;
  targetHref: string;
}

export const BANNER_ID = "ccpa-optout-assistant-banner";

const SEVERITY_COLORS = {
  red_valid: "#c62828",
  yellow_ambiguous: "#c8a400",
} as const;

export function buildBannerModel(scan: PageScan): BannerModel | null {
  if (scan.best === null) return null;
  if (scan.pageVerdict === "valid") {
    return {
      severity: "red_valid",
      message: "This website sells your personal information.",
      actionLabel: "Opt out of sale",
      targetDomPath: scan.best.domPath,
      targetHref: scan.best.target,
    };
  }
  return {
    severity: "yellow_ambiguous",
    message: "This website may sell your personal information.",
    actionLabel: "Review privacy options",
    targetDomPath: scan.best.domPath,
    targetHref: scan.best.target,
  };
}

export interface BannerHandlers {
  onOptOut: () => void;
  onClose: () => void;
}

/**
 * Injects the banner into an isolated bottom-left container with
 * maximal stacking order. The page is never otherwise modified.
 */
export function injectBanner(doc: Document, model: BannerModel, handlers: BannerHandlers): HTMLElement {
  removeBanner(doc);
  const container = doc.createElement("div");
  container.id = BANNER_ID;
  container.setAttribute(
    "style",
    [
      "position: fixed",
      "bottom: 16px",
      "left: 16px",
      "z-index: 2147483647",
      `background: ${SEVERITY_COLORS[model.severity]}`,
      "color: #fff",
      "padding: 12px 16px",
      "border-radius: 6px",
      "font-family: system-ui, sans-serif",
      "font-size: 14px",
      "max-width: 320px",
      "box-shadow: 0 2px 12px rgba(0,0,0,.35)",
    ].join("; "),
  );
  container.dataset.severity = model.severity;

  const message = doc.createElement("p");
  message.textContent = model.message;
  message.setAttribute("style", "margin: 0 0 8px 0");
  container.appendChild(message);

  const action = doc.createElement("button");
  action.textContent = model.actionLabel;
  action.dataset.action = "optout";
  action.setAttribute(
    "style",
    "background: #fff; color: #222; border: 0; padding: 6px 12px; border-radius: 4px; cursor: pointer",
  );
  action.addEventListener("click", () => handlers.onOptOut());
  container.appendChild(action);

  const close = doc.createElement("button");
  close.textContent = "×";
  close.dataset.action = "close";
  close.setAttribute("aria-label", "Close");
  close.setAttribute(
    "style",
    "background: transparent; color: #fff; border: 0; position: absolute; top: 4px; right: 8px; cursor: pointer",
  );
  close.addEventListener("click", () => handlers.onClose());
  container.appendChild(close);

  doc.body.appendChild(container);
  return container;
}

export function removeBanner(doc: Document): void {
  doc.getElementById(BANNER_ID)?.remove();
}

export function bannerElement(doc: Document): HTMLElement | null {
  return doc.getElementById(BANNER_ID);
}

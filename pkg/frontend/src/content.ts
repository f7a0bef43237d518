import { BANNER_ID, buildBannerModel, injectBanner, removeBanner } from "./banner.js";
import { ExtensionConfig } from "./config.js";
import { hashSite } from "./digest.js";
import { PageScan, Verdict, assembleScan, scanPage } from "./detection.js";
import { IconColor, SiteStateStore, bannerVisible, iconColor } from "./state.js";
import { EventKind, TelemetryQueue, makeEvent, nowRfc3339 } from "./telemetry.js";

export interface PagePorts {
  setIcon(color: IconColor): void;
  /** Last-resort navigation when the native element is gone. */
  navigate(url: string): void;
  /** Event timestamps; overridable for deterministic tests. */
  clock?: () => string;
}

/**
 * Drives one page view: scan on ready, emit exactly one page_load,
 * color the icon, and (in coa mode) show the banner unless the site
 * was opted out or dismissed permanently. Every user gesture maps to
 * exactly one telemetry event.
 */
export class PageController {
  private scan: PageScan | null = null;
  private site = "";
  private pageLoadSent = false;
  // Verdict shown to the user at page-ready; gesture events carry this
  // even if the page mutates before the gesture lands.
  private readyVerdict: Verdict = "none";

  constructor(
    private config: ExtensionConfig,
    private doc: Document,
    private url: string,
    private states: SiteStateStore,
    private telemetry: TelemetryQueue,
    private ports: PagePorts,
  ) {}

  get verdict(): Verdict {
    return this.readyVerdict;
  }

  private record(kind: EventKind): void {
    const ts = (this.ports.clock ?? nowRfc3339)();
    void this.telemetry.recordAndFlush(
      makeEvent(this.config.userId, this.site, this.readyVerdict, kind, this.config.mode, ts),
    );
  }

  private freshScan(): PageScan {
    // The injected banner is not part of the native page.
    const candidates = scanPage(this.doc, this.config.phrases).candidates.filter(
      (c) => c.element.closest(`#${BANNER_ID}`) === null,
    );
    return assembleScan(candidates);
  }

  async onPageReady(): Promise<void> {
    this.site = await hashSite(this.url);
    this.states.beginVisit(this.site);
    this.scan = this.freshScan();
    this.readyVerdict = this.scan.pageVerdict;

    if (!this.pageLoadSent) {
      this.record("page_load");
      this.pageLoadSent = true;
    }

    if (this.config.mode !== "coa") return; // observational: nothing visible

    this.ports.setIcon(iconColor(this.verdict, this.config.mode));
    const state = await this.states.stateFor(this.site);
    if (bannerVisible(this.verdict, state, this.config.mode) && this.scan.best) {
      const model = buildBannerModel(this.scan);
      if (model) {
        injectBanner(this.doc, model, {
          onOptOut: () => void this.bannerOptOut(),
          onClose: () => void this.bannerClose(),
        });
      }
    }
  }

  /** Click the detected native element; fall back to its href. */
  private simulateNativeClick(): void {
    const best = this.scan?.best;
    if (!best) return;
    let element = this.doc.querySelector(best.domPath);
    if (element === null) {
      // Stale locator: the page mutated since the scan. Rescan once.
      this.scan = this.freshScan();
      element = this.scan.best ? this.doc.querySelector(this.scan.best.domPath) : null;
    }
    if (element !== null) {
      const view = this.doc.defaultView as { MouseEvent: typeof MouseEvent } | null;
      const EventCtor = view?.MouseEvent ?? MouseEvent;
      element.dispatchEvent(new EventCtor("click", { bubbles: true, cancelable: true }));
      return;
    }
    // Second failure: open the original candidate's href directly.
    if (best.target) {
      this.ports.navigate(best.target);
    }
  }

  async bannerOptOut(): Promise<void> {
    this.simulateNativeClick();
    this.record("optout_banner");
    await this.states.markOptedOut(this.site);
    removeBanner(this.doc);
  }

  async bannerClose(): Promise<void> {
    this.states.markSessionClosed(this.site);
    this.record("banner_closed");
    removeBanner(this.doc);
  }

  async menuOptOut(): Promise<void> {
    this.simulateNativeClick();
    this.record("optout_menu");
    await this.states.markOptedOut(this.site);
    removeBanner(this.doc);
  }

  async menuDisable(): Promise<void> {
    await this.states.markDisabled(this.site);
    this.record("banner_disabled");
    removeBanner(this.doc);
  }

  /** A native opt-out link click observed on the page itself. */
  async nativeOptOut(): Promise<void> {
    this.record("optout_native");
    await this.states.markOptedOut(this.site);
    removeBanner(this.doc);
  }
}

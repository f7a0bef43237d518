import { Mode } from "./config.js";
import { Verdict } from "./detection.js";
import { KeyValueStorage } from "./config.js";

/**
 * Per-site banner suppression state.
 *
 * opted_out and disabled persist forever; session_closed lives only in
 * memory, so the banner reappears on the next visit to the site.
 */
export type SiteState = "fresh" | "opted_out" | "disabled" | "session_closed";

const PERSISTENT: ReadonlySet<string> = new Set(["opted_out", "disabled"]);

export class SiteStateStore {
  private sessionClosed = new Set<string>();

  constructor(private storage: KeyValueStorage) {}

  private key(site: string): string {
    return `site-state:${site}`;
  }

  async stateFor(site: string): Promise<SiteState> {
    const stored = await this.storage.get(this.key(site));
    if (stored !== null && PERSISTENT.has(stored)) return stored as SiteState;
    if (this.sessionClosed.has(site)) return "session_closed";
    return "fresh";
  }

  async markOptedOut(site: string): Promise<void> {
    await this.storage.set(this.key(site), "opted_out");
  }

  async markDisabled(site: string): Promise<void> {
    await this.storage.set(this.key(site), "disabled");
  }

  markSessionClosed(site: string): void {
    this.sessionClosed.add(site);
  }

  /** Called on a fresh navigation: closing only lasts one page view. */
  beginVisit(site: string): void {
    this.sessionClosed.delete(site);
  }
}

/** Banner visibility is a pure function of verdict, state, and mode. */
export function bannerVisible(verdict: Verdict, state: SiteState, mode: Mode): boolean {
  return mode === "coa" && verdict !== "none" && state === "fresh";
}

export type IconColor = "red" | "yellow" | "neutral";

export function iconColor(verdict: Verdict, mode: Mode): IconColor {
  if (mode !== "coa") return "neutral";
  if (verdict === "valid") return "red";
  if (verdict === "ambiguous") return "yellow";
  return "neutral";
}

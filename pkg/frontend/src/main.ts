/**
 * Content-script entry point: wires the page controller to the
 * WebExtension APIs (storage, messaging, navigation).
 */

import { KeyValueStorage, loadOrInitConfig } from "./config.js";
import { PageController } from "./content.js";
import { SiteStateStore } from "./state.js";
import { TelemetryQueue } from "./telemetry.js";
import { IconColor } from "./state.js";

declare const chrome: {
  storage: {
    local: {
      get(keys: string[], cb: (items: Record<string, string>) => void): void;
      set(items: Record<string, string>, cb: () => void): void;
    };
  };
  runtime: {
    sendMessage(message: unknown): void;
    onMessage: {
      addListener(handler: (message: unknown) => void): void;
    };
  };
};

class ChromeStorage implements KeyValueStorage {
  get(key: string): Promise<string | null> {
    return new Promise((resolve) =>
      chrome.storage.local.get([key], (items) => resolve(items[key] ?? null)),
    );
  }

  set(key: string, value: string): Promise<void> {
    return new Promise((resolve) => chrome.storage.local.set({ [key]: value }, resolve));
  }
}

const DEFAULTS = {
  mode: "coa" as const,
  endpoint: "http://127.0.0.1:8080",
};

export async function bootContentScript(): Promise<PageController> {
  const storage = new ChromeStorage();
  const config = await loadOrInitConfig(storage, DEFAULTS);
  const controller = new PageController(
    config,
    document,
    window.location.href,
    new SiteStateStore(storage),
    new TelemetryQueue(config.endpoint),
    {
      setIcon(color: IconColor): void {
        chrome.runtime.sendMessage({ kind: "set-icon", color });
      },
      navigate(url: string): void {
        window.location.assign(url);
      },
    },
  );
  chrome.runtime.onMessage.addListener((message) => {
    const kind = (message as { kind?: string }).kind;
    if (kind === "menu-optout") void controller.menuOptOut();
    if (kind === "menu-disable") void controller.menuDisable();
  });
  await controller.onPageReady();
  return controller;
}

if (typeof chrome !== "undefined" && typeof document !== "undefined" && chrome?.storage) {
  if (document.readyState === "complete") {
    void bootContentScript();
  } else {
    window.addEventListener("load", () => void bootContentScript(), { once: true });
  }
}

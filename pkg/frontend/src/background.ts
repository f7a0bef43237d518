/**
 * WebExtension background worker: colors the toolbar icon per tab and
 * relays menu actions to the content script. Everything testable lives
 * in the other modules; this file is thin chrome.* wiring.
 */

import { IconColor } from "./state.js";

declare const chrome: {
  runtime: {
    onMessage: {
      addListener(
        handler: (message: unknown, sender: unknown, sendResponse: (r?: unknown) => void) => void,
      ): void;
    };
  };
  action: {
    setBadgeBackgroundColor(details: { color: string; tabId?: number }): void;
    setBadgeText(details: { text: string; tabId?: number }): void;
  };
  tabs: {
    sendMessage(tabId: number, message: unknown): void;
    query(info: { active: boolean; currentWindow: boolean }, cb: (tabs: { id?: number }[]) => void): void;
  };
};

const BADGE_COLORS: Record<IconColor, string> = {
  red: "#c62828",
  yellow: "#c8a400",
  neutral: "#9e9e9e",
};

export interface IconMessage {
  kind: "set-icon";
  color: IconColor;
}

export interface MenuCommand {
  kind: "menu-optout" | "menu-disable";
}

export function applyIcon(tabId: number, color: IconColor): void {
  chrome.action.setBadgeBackgroundColor({ color: BADGE_COLORS[color], tabId });
  chrome.action.setBadgeText({ text: color === "neutral" ? "" : "!", tabId });
}

export function main(): void {
  chrome.runtime.onMessage.addListener((message, sender) => {
    const msg = message as IconMessage;
    const tabId = (sender as { tab?: { id?: number } }).tab?.id;
    if (msg.kind === "set-icon" && tabId !== undefined) {
      applyIcon(tabId, msg.color);
    }
  });
}

export function sendMenuCommand(command: MenuCommand["kind"]): void {
  chrome.tabs.query({ active: true, currentWindow: true }, (tabs) => {
    if (tabs[0]?.id !== undefined) {
      chrome.tabs.sendMessage(tabs[0].id, { kind: command });
    }
  });
}

if (typeof chrome !== "undefined" && chrome?.runtime?.onMessage) {
  main();
}

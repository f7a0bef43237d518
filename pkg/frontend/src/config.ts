import { DEFAULT_PHRASES, PhraseSet } from "./detection.js";

export type Mode = "observational" | "coa";

export interface ExtensionConfig {
  mode: Mode; // immutable after install
  endpoint: string; // telemetry service base URL
  userId: string; // generated once at install, persisted
  phrases: PhraseSet;
}

export interface KeyValueStorage {
  get(key: string): Promise<string | null>;
  set(key: string, value: string): Promise<void>;
}

const CONFIG_KEY = "extension-config";

/** Loads the persisted config, creating one on first run. */
export async function loadOrInitConfig(
  storage: KeyValueStorage,
  defaults: { mode: Mode; endpoint: string },
): Promise<ExtensionConfig> {
  const stored = await storage.get(CONFIG_KEY);
  if (stored !== null) {
    return JSON.parse(stored) as ExtensionConfig;
  }
  const config: ExtensionConfig = {
    mode: defaults.mode,
    endpoint: defaults.endpoint,
    userId: crypto.randomUUID(),
    phrases: DEFAULT_PHRASES,
  };
  await storage.set(CONFIG_KEY, JSON.stringify(config));
  return config;
}

/** In-memory storage for tests and previews. */
export class MemoryStorage implements KeyValueStorage {
  private data = new Map<string, string>();

  async get(key: string): Promise<string | null> {
    return this.data.has(key) ? (this.data.get(key) as string) : null;
  }

  async set(key: string, value: string): Promise<void> {
    this.data.set(key, value);
  }
}

/** Host hashing: sites are reported only as SHA-256 digests. */

export async function hashSite(url: string): Promise<string> {
  let host: string;
  try {
    host = new URL(url).hostname.toLowerCase();
  } catch {
    throw new Error(`cannot hash site: unparseable URL ${url}`);
  }
  if (!host) throw new Error(`cannot hash site: no host in ${url}`);
  const bytes = new TextEncoder().encode(host);
  const digest = await crypto.subtle.digest("SHA-256", bytes);
  return Array.from(new Uint8Array(digest))
    .map((b) => b.toString(16).padStart(2, "0"))
    .join("");
}

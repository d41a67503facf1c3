import { readFileSync } from "node:fs";
import { request } from "node:http";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchLike, MinimalResponse } from "../src/api.js";
import type { ReportDoc } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

export function loadFixtureReport(revision: 1 | 2 | 3): ReportDoc {
  const path = join(here, "..", "fixtures", `report_rev${revision}.json`);
  return JSON.parse(readFileSync(path, "utf-8")) as ReportDoc;
}

/** Minimal png byte stream: signature + IHDR carrying the dimensions.
 * Enough for header-based validation and for upload stubs. */
export function makePngBytes(width: number, height: number): Uint8Array {
  const bytes = new Uint8Array(33);
  bytes.set([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a], 0);
  const view = new DataView(bytes.buffer);
  view.setUint32(8, 13); // IHDR length
  bytes.set([0x49, 0x48, 0x44, 0x52], 12); // "IHDR"
  view.setUint32(16, width);
  view.setUint32(20, height);
  bytes.set([8, 2, 0, 0, 0], 24); // bit depth, color type, etc.
  return bytes;
}

export function makeGifBytes(): Uint8Array {
  return new Uint8Array([0x47, 0x49, 0x46, 0x38, 0x39, 0x61, 10, 0, 10, 0]);
}

/** Real-network fetch built on node:http, independent of the jsdom
 * environment's (absent) fetch implementation. */
export const httpFetch: FetchLike = (input, init = {}) =>
  new Promise<MinimalResponse>((resolve, reject) => {
    const req = request(
      input,
      { method: init.method ?? "GET", headers: init.headers ?? {} },
      (res) => {
        const chunks: Buffer[] = [];
        res.on("data", (chunk) => chunks.push(chunk));
        res.on("end", () => {
          const text = Buffer.concat(chunks).toString("utf-8");
          resolve({
            ok: (res.statusCode ?? 0) >= 200 && (res.statusCode ?? 0) < 300,
            status: res.statusCode ?? 0,
            text: async () => text,
          });
        });
      },
    );
    req.on("error", reject);
    if (init.body !== undefined) req.write(init.body);
    req.end();
  });

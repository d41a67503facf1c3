// Acceptance: client-side validation rejects a .gif and a 2500x2500 png
// without any network request; a 300x300 png passes and reaches the 202
// response of a local service implementing the upload contract.
import { createServer } from "node:http";
import type { AddressInfo } from "node:net";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { checkUpload } from "../src/validate.js";
import { createTimeline } from "../src/timeline.js";
import { httpFetch, makeGifBytes, makePngBytes } from "./helpers.js";

describe("checkUpload", () => {
  it("accepts a 300x300 png", () => {
    const result = checkUpload("chart.png", makePngBytes(300, 300));
    expect(result).toEqual({ ok: true, width: 300, height: 300 });
  });

  it("rejects a .gif by extension", () => {
    const result = checkUpload("anim.gif", makeGifBytes());
    expect(result.ok).toBe(false);
    expect(result.reason).toContain("expected png or jpeg");
  });

  it("rejects png bytes behind a lying extension", () => {
    const result = checkUpload("sneaky.png", makeGifBytes());
    expect(result.ok).toBe(false);
  });

  it("rejects 2500x2500 as out of bounds", () => {
    const result = checkUpload("big.png", makePngBytes(2500, 2500));
    expect(result.ok).toBe(false);
    expect(result.reason).toContain("2500x2500");
  });

  it("rejects 99x99 as below the minimum", () => {
    expect(checkUpload("small.png", makePngBytes(99, 99)).ok).toBe(false);
  });

  it("accepts the exact bounds", () => {
    expect(checkUpload("min.png", makePngBytes(100, 100)).ok).toBe(true);
    expect(checkUpload("max.png", makePngBytes(2000, 2000)).ok).toBe(true);
  });

  it("reads jpeg dimensions from the SOF marker", () => {
    // hand-built tiny jpeg header: SOI + SOF0 with 200x120
    const bytes = new Uint8Array([
      0xff, 0xd8, 0xff, 0xc0, 0x00, 0x11, 0x08, 0x00, 0x78, 0x00, 0xc8, 0x03,
      0x01, 0x22, 0x00, 0x02, 0x11, 0x01, 0x03, 0x11, 0x01,
    ]);
    const result = checkUpload("photo.jpg", bytes);
    expect(result).toEqual({ ok: true, width: 200, height: 120 });
  });
});

describe("upload against a local service", () => {
  let server: ReturnType<typeof createServer>;
  let baseUrl: string;
  let requests: string[] = [];

  beforeAll(async () => {
    server = createServer((req, res) => {
      requests.push(`${req.method} ${req.url}`);
      if (req.method === "POST" && /^\/projects\/[^/]+\/revisions$/.test(req.url ?? "")) {
        let size = 0;
        req.on("data", (chunk) => (size += chunk.length));
        req.on("end", () => {
          res.writeHead(202, { "Content-Type": "application/json" });
          res.end(
            JSON.stringify({
              id: "p1.1",
              project_id: "p1",
              sequence: 1,
              status: "queued",
              image_ref: "image.png",
              report_ref: null,
              error: null,
              uploaded_at: "t",
              started_at: null,
              finished_at: null,
            }),
          );
        });
        return;
      }
      if (req.method === "GET" && /^\/projects\/[^/]+\/revisions$/.test(req.url ?? "")) {
        res.writeHead(200, { "Content-Type": "application/json" });
        res.end(JSON.stringify({ project_id: "p1", revisions: [] }));
        return;
      }
      res.writeHead(404);
      res.end();
    });
    await new Promise<void>((resolve) => server.listen(0, "127.0.0.1", resolve));
    baseUrl = `http://127.0.0.1:${(server.address() as AddressInfo).port}`;
  });

  afterAll(async () => {
    await new Promise((resolve) => server.close(resolve));
  });

  it("a valid 300x300 png reaches the 202 response", async () => {
    const api = new ApiClient(baseUrl, null, httpFetch);
    const record = await api.uploadRevision("p1", "chart.png", makePngBytes(300, 300));
    expect(record.sequence).toBe(1);
    expect(record.status).toBe("queued");
    expect(requests).toContain("POST /projects/p1/revisions");
  });

  it("invalid files are rejected before any network request", async () => {
    requests = [];
    const api = new ApiClient(baseUrl, null, httpFetch);
    const scheduler = { set: (() => 0) as never, clear: (() => undefined) as never };
    const timeline = createTimeline(api, "p1", () => undefined, scheduler);

    await expect(timeline.upload("anim.gif", makeGifBytes())).rejects.toThrow();
    await expect(timeline.upload("big.png", makePngBytes(2500, 2500))).rejects.toThrow();
    expect(requests).toEqual([]); // nothing reached the service

    const record = await timeline.upload("ok.png", makePngBytes(300, 300));
    expect(record.status).toBe("queued");
    expect(requests[0]).toBe("POST /projects/p1/revisions");
  });
});

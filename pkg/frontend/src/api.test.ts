import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, formatCount } from "./api.js";
import type { FetchLike } from "./api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("formatCount", () => {
  it("shows one decimal", () => {
    expect(formatCount(0.9999997)).toBe("1.0");
    expect(formatCount(21.04)).toBe("21.0");
    expect(formatCount(0)).toBe("0.0");
    expect(formatCount(7.35)).toBe("7.3");
  });
});

describe("ApiClient", () => {
  it("lists images", async () => {
    const fetchImpl: FetchLike = async (url) => {
      expect(url).toBe("/api/images");
      return jsonResponse(["a", "b"]);
    };
    const client = new ApiClient("", fetchImpl);
    expect(await client.listImages()).toEqual(["a", "b"]);
  });

  it("returns null for a 404 annotation", async () => {
    const client = new ApiClient("", async () => jsonResponse({ detail: "x" }, 404));
    expect(await client.getAnnotation("img")).toBeNull();
  });

  it("surfaces error details from the service", async () => {
    const client = new ApiClient("", async () =>
      jsonResponse({ detail: "label 0 missing 'x2'" }, 400),
    );
    await expect(
      client.putAnnotation({ image: "img", width: 1, height: 1, labels: [] }),
    ).rejects.toThrowError(ApiError);
    await expect(
      client.putAnnotation({ image: "img", width: 1, height: 1, labels: [] }),
    ).rejects.toThrow("label 0 missing 'x2'");
  });

  it("PUTs the document body verbatim", async () => {
    let captured: string | undefined;
    const client = new ApiClient("", async (_url, init) => {
      captured = init?.body as string;
      return jsonResponse({ saved: "img", labels: 0 });
    });
    const doc = { image: "img", width: 4, height: 5, labels: [] };
    await client.putAnnotation(doc);
    expect(JSON.parse(captured ?? "")).toEqual(doc);
  });

  it("encodes ids in URLs", () => {
    const client = new ApiClient();
    expect(client.imageUrl("cam 1")).toBe("/api/images/cam%201");
  });

  it("passes the abort signal through to preview", async () => {
    let seen: AbortSignal | null | undefined;
    const client = new ApiClient("", async (_url, init) => {
      seen = init?.signal;
      return jsonResponse({ count: 0, heatmap: "", width: 0, height: 0 });
    });
    const controller = new AbortController();
    await client.preview(
      { width: 10, height: 10, labels: [], scheme: "agk" },
      controller.signal,
    );
    expect(seen).toBe(controller.signal);
  });
});

import type { AnnotationDoc, PreviewRequest, PreviewResponse } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function detailOf(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") {
      return body.detail;
    }
  } catch {
    /* non-JSON error body */
  }
  return `${response.status} ${response.statusText}`;
}

/** Thin client for the annotation service; all counts come from here. */
export class ApiClient {
  constructor(
    private readonly baseUrl = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async listImages(): Promise<string[]> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/images`);
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
    return (await response.json()) as string[];
  }

  imageUrl(imageId: string): string {
    return `${this.baseUrl}/api/images/${encodeURIComponent(imageId)}`;
  }

  /** Stored annotations, or null when the image has none yet. */
  async getAnnotation(imageId: string): Promise<AnnotationDoc | null> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/annotations/${encodeURIComponent(imageId)}`,
    );
    if (response.status === 404) {
      return null;
    }
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
    return (await response.json()) as AnnotationDoc;
  }

  async putAnnotation(doc: AnnotationDoc): Promise<void> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/annotations/${encodeURIComponent(doc.image)}`,
      {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(doc),
      },
    );
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
  }

  async preview(request: PreviewRequest, signal?: AbortSignal): Promise<PreviewResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/preview`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
      signal,
    });
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
    return (await response.json()) as PreviewResponse;
  }
}

/** Counts are displayed with one decimal, e.g. 0.9999997 -> "1.0". */
export function formatCount(count: number): string {
  return count.toFixed(1);
}

/** Wire types shared with the annotation service. */

export interface WireLabel {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

/** The annotation JSON schema stored by the service, verbatim. */
export interface AnnotationDoc {
  image: string;
  width: number;
  height: number;
  labels: WireLabel[];
}

export type Scheme = "dot" | "line" | "agk";

export const SCHEMES: readonly Scheme[] = ["dot", "line", "agk"];

export interface KernelConfigWire {
  sigma_basic?: number;
  expand_factor?: number;
  aspect_ratio?: number;
  fwhm_const?: number;
  alpha?: number;
  trunc_mult?: number;
}

export interface PreviewRequest {
  width: number;
  height: number;
  labels: WireLabel[];
  scheme: Scheme;
  config?: KernelConfigWire;
}

export interface PreviewResponse {
  count: number;
  /** base64 of raw 8-bit grayscale bytes, row-major. */
  heatmap: string;
  width: number;
  height: number;
}

/** A label during editing: wire coordinates plus creation order. */
export interface UiLabel extends WireLabel {
  id: number;
}

import type { PreviewResponse } from "./types.js";

/** Raw grayscale bytes from the preview payload. */
export function decodeHeatmap(response: PreviewResponse): Uint8ClampedArray<ArrayBuffer> {
  const binary = atob(response.heatmap);
  const expected = response.width * response.height;
  if (binary.length !== expected) {
    throw new Error(`heatmap size ${binary.length} != ${expected}`);
  }
  const gray = new Uint8ClampedArray(expected);
  for (let i = 0; i < expected; i++) {
    gray[i] = binary.charCodeAt(i);
  }
  return gray;
}

/**
 * Warm-colored RGBA pixels for overlaying on the image: intensity drives
 * both the red-yellow ramp and the alpha, so empty regions stay clear.
 */
export function grayToRgba(gray: Uint8ClampedArray): Uint8ClampedArray<ArrayBuffer> {
  const rgba = new Uint8ClampedArray(gray.length * 4);
  for (let i = 0; i < gray.length; i++) {
    const v = gray[i] ?? 0;
    rgba[i * 4] = 255;
    rgba[i * 4 + 1] = Math.round((v * 180) / 255);
    rgba[i * 4 + 2] = 0;
    rgba[i * 4 + 3] = Math.round(v * 0.8);
  }
  return rgba;
}

/** Paint the (possibly downsampled) heatmap stretched over the overlay canvas. */
export function renderHeatmap(response: PreviewResponse, overlay: HTMLCanvasElement): void {
  const ctx = overlay.getContext("2d");
  if (!ctx) {
    return;
  }
  ctx.clearRect(0, 0, overlay.width, overlay.height);
  if (response.width === 0 || response.height === 0) {
    return;
  }
  const rgba = grayToRgba(decodeHeatmap(response));
  const image = new ImageData(rgba, response.width, response.height);
  const cell = document.createElement("canvas");
  cell.width = response.width;
  cell.height = response.height;
  cell.getContext("2d")?.putImageData(image, 0, 0);
  ctx.imageSmoothingEnabled = true;
  ctx.drawImage(cell, 0, 0, overlay.width, overlay.height);
}

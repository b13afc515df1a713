import { ApiClient, ApiError, formatCount } from "./api.js";
import { PreviewScheduler } from "./debounce.js";
import { renderHeatmap } from "./heatmap.js";
import { LabelStore, MIN_DRAG_PX, dragLength } from "./state.js";
import { SCHEMES, type AnnotationDoc, type Scheme, type UiLabel } from "./types.js";

const api = new ApiClient();
const store = new LabelStore();

let currentImage: string | null = null;
let imageWidth = 0;
let imageHeight = 0;
let scheme: Scheme = "agk";
let lastSyncedDoc: string | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const imageSelect = el<HTMLSelectElement>("image-select");
const imageCanvas = el<HTMLCanvasElement>("image-canvas");
const overlayCanvas = el<HTMLCanvasElement>("overlay-canvas");
const drawCanvas = el<HTMLCanvasElement>("draw-canvas");
const countBadge = el<HTMLSpanElement>("count-badge");
const previewCount = el<HTMLSpanElement>("preview-count");
const banner = el<HTMLDivElement>("banner");
const bannerText = el<HTMLSpanElement>("banner-text");
const bannerRetry = el<HTMLButtonElement>("banner-retry");

let retryAction: (() => void) | null = null;

function showBanner(message: string, retry: (() => void) | null = null): void {
  bannerText.textContent = message;
  retryAction = retry;
  bannerRetry.hidden = retry === null;
  banner.hidden = false;
}

function hideBanner(): void {
  banner.hidden = true;
  retryAction = null;
}

bannerRetry.addEventListener("click", () => {
  const action = retryAction;
  hideBanner();
  action?.();
});

// --- drawing ------------------------------------------------------------

interface Drag {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

let activeDrag: Drag | null = null;

function canvasPoint(event: PointerEvent): { x: number; y: number } {
  const rect = drawCanvas.getBoundingClientRect();
  return {
    x: ((event.clientX - rect.left) / rect.width) * imageWidth,
    y: ((event.clientY - rect.top) / rect.height) * imageHeight,
  };
}

function drawLabel(ctx: CanvasRenderingContext2D, label: UiLabel, selected: boolean): void {
  ctx.strokeStyle = selected ? "#00e5ff" : "#76ff03";
  ctx.fillStyle = ctx.strokeStyle;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(label.x1, label.y1);
  ctx.lineTo(label.x2, label.y2);
  ctx.stroke();
  // tail dot and head arrow: direction is shown but means nothing downstream
  ctx.beginPath();
  ctx.arc(label.x1, label.y1, 3, 0, 2 * Math.PI);
  ctx.fill();
  const angle = Math.atan2(label.y2 - label.y1, label.x2 - label.x1);
  ctx.beginPath();
  ctx.moveTo(label.x2, label.y2);
  ctx.lineTo(label.x2 - 8 * Math.cos(angle - 0.4), label.y2 - 8 * Math.sin(angle - 0.4));
  ctx.lineTo(label.x2 - 8 * Math.cos(angle + 0.4), label.y2 - 8 * Math.sin(angle + 0.4));
  ctx.closePath();
  ctx.fill();
}

function redraw(): void {
  const ctx = drawCanvas.getContext("2d");
  if (!ctx) {
    return;
  }
  ctx.clearRect(0, 0, drawCanvas.width, drawCanvas.height);
  for (const label of store.all()) {
    drawLabel(ctx, label, label.id === store.selectedId);
  }
  if (activeDrag) {
    ctx.strokeStyle = "#ffd740";
    ctx.setLineDash([6, 4]);
    ctx.beginPath();
    ctx.moveTo(activeDrag.x1, activeDrag.y1);
    ctx.lineTo(activeDrag.x2, activeDrag.y2);
    ctx.stroke();
    ctx.setLineDash([]);
  }
  countBadge.textContent = `${store.count} label${store.count === 1 ? "" : "s"}`;
}

// --- live preview --------------------------------------------------------

const previewScheduler = new PreviewScheduler(async (signal) => {
  if (!currentImage) {
    return;
  }
  try {
    const response = await api.preview(
      {
        width: imageWidth,
        height: imageHeight,
        labels: store.serialize(currentImage, imageWidth, imageHeight).labels,
        scheme,
      },
      signal,
    );
    renderHeatmap(response, overlayCanvas);
    previewCount.textContent = `count ${formatCount(response.count)}`;
    hideBanner();
  } catch (error) {
    if (error instanceof DOMException && error.name === "AbortError") {
      return; // superseded by a newer preview
    }
    showBanner("preview unavailable - overlay may be stale; editing still works");
  }
});

function onLabelsChanged(): void {
  redraw();
  previewScheduler.request();
}

// --- pointer handling -----------------------------------------------------

drawCanvas.addEventListener("pointerdown", (event) => {
  if (!currentImage) {
    return;
  }
  const p = canvasPoint(event);
  activeDrag = { x1: p.x, y1: p.y, x2: p.x, y2: p.y };
  drawCanvas.setPointerCapture(event.pointerId);
});

drawCanvas.addEventListener("pointermove", (event) => {
  if (!activeDrag) {
    return;
  }
  const p = canvasPoint(event);
  activeDrag.x2 = p.x;
  activeDrag.y2 = p.y;
  redraw();
});

drawCanvas.addEventListener("pointerup", (event) => {
  if (!activeDrag) {
    return;
  }
  const drag = activeDrag;
  activeDrag = null;
  const p = canvasPoint(event);
  drag.x2 = p.x;
  drag.y2 = p.y;
  if (dragLength(drag.x1, drag.y1, drag.x2, drag.y2) < MIN_DRAG_PX) {
    store.selectAt(drag.x2, drag.y2); // short drag = click = select
    redraw();
    return;
  }
  store.addFromDrag(drag.x1, drag.y1, drag.x2, drag.y2);
  onLabelsChanged();
});

// --- keyboard -------------------------------------------------------------

document.addEventListener("keydown", (event) => {
  if (event.target instanceof HTMLInputElement || event.target instanceof HTMLSelectElement) {
    return;
  }
  if (event.key === "Delete" || event.key === "Backspace") {
    if (store.deleteSelected()) {
      onLabelsChanged();
    }
  } else if (event.key >= "1" && event.key <= "3") {
    setScheme(SCHEMES[Number(event.key) - 1] ?? "agk");
  } else if ((event.ctrlKey || event.metaKey) && event.key.toLowerCase() === "z") {
    if (event.shiftKey ? store.redo() : store.undo()) {
      onLabelsChanged();
    }
    event.preventDefault();
  }
});

// --- scheme toggle ----------------------------------------------------------

function setScheme(next: Scheme): void {
  scheme = next;
  for (const button of document.querySelectorAll<HTMLButtonElement>("[data-scheme]")) {
    button.classList.toggle("active", button.dataset.scheme === next);
  }
  previewScheduler.request();
}

for (const button of document.querySelectorAll<HTMLButtonElement>("[data-scheme]")) {
  button.addEventListener("click", () => setScheme(button.dataset.scheme as Scheme));
}

// --- save / load / export ----------------------------------------------------

async function saveAnnotations(): Promise<void> {
  if (!currentImage) {
    return;
  }
  const doc = store.serialize(currentImage, imageWidth, imageHeight);
  try {
    const remote = await api.getAnnotation(currentImage);
    if (remote !== null && lastSyncedDoc !== null && JSON.stringify(remote) !== lastSyncedDoc) {
      showBanner("overwrote changes saved elsewhere (last write wins)");
    }
    await api.putAnnotation(doc);
    lastSyncedDoc = JSON.stringify(doc);
    if (banner.hidden) {
      hideBanner();
    }
  } catch (error) {
    const reason = error instanceof ApiError ? error.message : "service unreachable";
    showBanner(`save failed: ${reason}`, () => void saveAnnotations());
  }
}

function exportAnnotations(): void {
  if (!currentImage) {
    return;
  }
  const doc = store.serialize(currentImage, imageWidth, imageHeight);
  const blob = new Blob([JSON.stringify(doc, null, 2)], { type: "application/json" });
  const anchor = document.createElement("a");
  anchor.href = URL.createObjectURL(blob);
  anchor.download = `${currentImage}.json`;
  anchor.click();
  URL.revokeObjectURL(anchor.href);
}

el<HTMLButtonElement>("save").addEventListener("click", () => void saveAnnotations());
el<HTMLButtonElement>("export").addEventListener("click", exportAnnotations);
el<HTMLButtonElement>("undo").addEventListener("click", () => {
  if (store.undo()) {
    onLabelsChanged();
  }
});
el<HTMLButtonElement>("redo").addEventListener("click", () => {
  if (store.redo()) {
    onLabelsChanged();
  }
});

// --- image loading ------------------------------------------------------------

async function loadImage(imageId: string): Promise<void> {
  currentImage = imageId;
  const image = new Image();
  image.src = api.imageUrl(imageId);
  await image.decode();
  imageWidth = image.naturalWidth;
  imageHeight = image.naturalHeight;
  for (const canvas of [imageCanvas, overlayCanvas, drawCanvas]) {
    canvas.width = imageWidth;
    canvas.height = imageHeight;
  }
  imageCanvas.getContext("2d")?.drawImage(image, 0, 0);

  let doc: AnnotationDoc | null = null;
  try {
    doc = await api.getAnnotation(imageId);
    hideBanner();
  } catch {
    showBanner("could not load stored annotations; starting empty");
  }
  store.load(doc ?? { image: imageId, width: imageWidth, height: imageHeight, labels: [] });
  lastSyncedDoc = doc === null ? null : JSON.stringify(doc);
  onLabelsChanged();
}

imageSelect.addEventListener("change", () => {
  if (imageSelect.value) {
    void loadImage(imageSelect.value);
  }
});

async function start(): Promise<void> {
  try {
    const images = await api.listImages();
    imageSelect.replaceChildren(
      ...images.map((id) => new Option(id, id)),
    );
    if (images.length > 0 && images[0] !== undefined) {
      imageSelect.value = images[0];
      await loadImage(images[0]);
    } else {
      showBanner("no images in the image directory");
    }
  } catch {
    showBanner("cannot reach the annotation service");
  }
}

void start();

import { AnnotationApi } from "./api.js";
import {
  renderExhausted,
  renderPalette,
  renderQuery,
  renderStatus,
} from "./render.js";
import { AnnotationController } from "./state.js";

/** Browser bootstrap: wires the controller to the DOM.  All annotation
 * logic lives in the controller so it stays testable without a browser. */

const api = new AnnotationApi("");
const controller = new AnnotationController(api);

let activeTag: string | undefined;
let dragStart: number | null = null;

const el = (id: string) => document.getElementById(id)!;

function redraw(): void {
  if (controller.status) {
    el("status").innerHTML = renderStatus(controller.status);
    el("curve").innerHTML = controller.curve.toSvg();
  }
  if (controller.exhausted) {
    el("query").innerHTML = renderExhausted();
    el("palette").innerHTML = "";
    return;
  }
  if (controller.query) {
    el("query").innerHTML = renderQuery(controller.query, controller.draft);
    el("palette").innerHTML = renderPalette(controller.palette, activeTag);
  }
  (el("submit") as HTMLButtonElement).disabled = !controller.canSubmit();
}

function tokenIndex(target: EventTarget | null): number | null {
  const button = (target as HTMLElement | null)?.closest?.("[data-index]");
  if (!button) return null;
  return Number((button as HTMLElement).dataset.index);
}

async function advance(): Promise<void> {
  await controller.refreshStatus();
  await controller.loadNext();
  redraw();
}

el("query").addEventListener("mousedown", (event) => {
  dragStart = tokenIndex(event.target);
});

el("query").addEventListener("mouseup", (event) => {
  const index = tokenIndex(event.target);
  if (index === null || dragStart === null) return;
  if (index !== dragStart && activeTag) {
    controller.applySpan(
      Math.min(dragStart, index),
      Math.max(dragStart, index),
      activeTag,
    );
  } else if (activeTag) {
    controller.setLabel(index, activeTag);
  } else {
    controller.cycleLabel(index);
  }
  dragStart = null;
  redraw();
});

el("palette").addEventListener("click", (event) => {
  const button = (event.target as HTMLElement).closest?.("[data-tag]");
  if (!button) return;
  activeTag = (button as HTMLElement).dataset.tag;
  redraw();
});

document.addEventListener("keydown", (event) => {
  const slot = Number(event.key) - 1;
  if (Number.isInteger(slot) && slot >= 0 && slot < controller.palette.length) {
    activeTag = controller.palette[slot];
    redraw();
  }
});

el("submit").addEventListener("click", async () => {
  const accepted = await controller.submit();
  if (accepted) await controller.loadNext();
  redraw();
});

advance().catch((err) => {
  el("query").innerHTML = `<div class="error">${String(err)}</div>`;
});

import { SessionStatus } from "./types.js";

export interface CurvePoint {
  labeled: number;
  f1: number;
}

/** Accumulates (labeled count, test F1) points as status updates arrive. */
export class LearningCurve {
  readonly points: CurvePoint[] = [];

  record(status: SessionStatus): void {
    if (status.last_f1 === null) return;
    const last = this.points[this.points.length - 1];
    if (last && last.labeled === status.labeled) {
      last.f1 = status.last_f1; // same round retrained
      return;
    }
    this.points.push({ labeled: status.labeled, f1: status.last_f1 });
  }

  /** Inline SVG polyline; fixed viewBox so it scales with CSS. */
  toSvg(width = 320, height = 120): string {
    if (this.points.length === 0) {
      return `<svg viewBox="0 0 ${width} ${height}"></svg>`;
    }
    const xs = this.points.map((p) => p.labeled);
    const minX = Math.min(...xs);
    const maxX = Math.max(...xs);
    const span = maxX - minX || 1;
    const coords = this.points
      .map((p) => {
        const x = ((p.labeled - minX) / span) * (width - 20) + 10;
        const y = height - 10 - p.f1 * (height - 20);
        return `${x.toFixed(1)},${y.toFixed(1)}`;
      })
      .join(" ");
    return (
      `<svg viewBox="0 0 ${width} ${height}">` +
      `<polyline fill="none" stroke="currentColor" points="${coords}"/>` +
      `</svg>`
    );
  }
}

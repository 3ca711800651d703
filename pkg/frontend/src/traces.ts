// Strip chart for raw/filtered traces: one row per channel, scrolling window.

import type { HelloMessage, TraceMessage } from "./protocol";

const WINDOW_SEC = 4.0;

export class TraceStrip {
  private ctx: CanvasRenderingContext2D;
  private buffers: number[][];
  private capacity: number;
  private labels: string[];

  constructor(
    private canvas: HTMLCanvasElement,
    hello: HelloMessage,
  ) {
    this.ctx = canvas.getContext("2d")!;
    this.labels = hello.montage.labels;
    this.capacity = Math.ceil(
      (hello.fs / hello.traceDecimation) * WINDOW_SEC,
    );
    this.buffers = this.labels.map(() => []);
  }

  push(msg: TraceMessage): void {
    for (let c = 0; c < msg.channels.length && c < this.buffers.length; c++) {
      const buf = this.buffers[c];
      buf.push(...msg.channels[c]);
      if (buf.length > this.capacity) buf.splice(0, buf.length - this.capacity);
    }
    this.draw();
  }

  clear(): void {
    for (const b of this.buffers) b.length = 0;
    this.draw();
  }

  private draw(): void {
    const { width, height } = this.canvas;
    const ctx = this.ctx;
    ctx.fillStyle = "#10131a";
    ctx.fillRect(0, 0, width, height);
    const rows = this.buffers.length;
    const rowH = height / rows;
    const scale = rowH / 60; // ~30 uV half-range per row
    ctx.font = "9px sans-serif";
    for (let c = 0; c < rows; c++) {
      const y0 = rowH * (c + 0.5);
      ctx.fillStyle = "#5a6578";
      ctx.fillText(this.labels[c], 2, y0 + 3);
      ctx.strokeStyle = "#9fd89f";
      ctx.beginPath();
      const buf = this.buffers[c];
      for (let i = 0; i < buf.length; i++) {
        const x = 30 + ((width - 34) * i) / this.capacity;
        const y = y0 - buf[i] * scale;
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      }
      ctx.stroke();
    }
  }
}

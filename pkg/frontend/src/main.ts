import { SessionClient } from "./client";
import { ControlSurface } from "./controls";
import { HeadScene } from "./scene";
import { TraceStrip } from "./traces";
import type { HelloMessage } from "./protocol";

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function wsUrl(): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}/ws`;
}

function main(): void {
  const banner = el<HTMLDivElement>("banner");
  const pipelineBox = el<HTMLDivElement>("pipelines");
  const calBtn = el<HTMLButtonElement>("calibration");
  const gainSlider = el<HTMLInputElement>("gain");
  const gainLabel = el<HTMLSpanElement>("gain-label");
  const tracesToggle = el<HTMLInputElement>("traces-toggle");
  const sourcesToggle = el<HTMLInputElement>("sources-toggle");
  const headCanvas = el<HTMLCanvasElement>("head");
  const traceCanvas = el<HTMLCanvasElement>("traces");

  const client = new SessionClient(wsUrl());
  const controls = new ControlSurface((m) => client.sendControl(m));

  let scene: HeadScene | null = null;
  let strip: TraceStrip | null = null;

  function buildPanel(hello: HelloMessage): void {
    pipelineBox.innerHTML = "";
    for (const kind of hello.pipelines) {
      const btn = document.createElement("button");
      btn.className = "mini-head";
      btn.id = `pipeline-${kind}`;
      btn.textContent = kind;
      btn.onclick = () => controls.selectPipeline(kind);
      pipelineBox.appendChild(btn);
    }
    gainSlider.min = "0.1";
    gainSlider.max = String(hello.gain.max);
    gainSlider.step = "0.1";
    gainSlider.value = String(hello.gain.value);
    sourcesToggle.disabled = !hello.sources.available;
  }

  client.onMessage = (msg) => {
    if (msg.type === "hello") {
      buildPanel(msg);
      scene = new HeadScene(headCanvas, msg);
      scene.start();
      strip = new TraceStrip(traceCanvas, msg);
    } else if (msg.type === "frame" && scene) {
      scene.updateFrame(msg);
    } else if (msg.type === "trace" && strip) {
      strip.push(msg);
    }
  };

  client.store.subscribe((st) => {
    const connectionText: Record<string, string> = {
      connecting: "connecting...",
      open: "",
      lost: "connection lost - retrying",
      ended: "session ended",
      "version-mismatch": st.versionBanner ?? "protocol version mismatch",
    };
    banner.textContent = st.errorBanner
      ? `server: ${st.errorBanner}`
      : connectionText[st.connection];
    banner.className = banner.textContent ? "banner visible" : "banner";

    for (const btn of pipelineBox.querySelectorAll("button")) {
      btn.classList.toggle("active", btn.id === `pipeline-${st.pipeline}`);
    }
    calBtn.textContent = {
      idle: "start calibration",
      calibrating: "end calibration",
      ready: "recalibrate",
    }[st.calibration];
    gainLabel.textContent = `gain ${st.gain.toFixed(1)}`;
    const disabled = st.connection !== "open";
    calBtn.disabled = disabled;
    gainSlider.disabled = disabled;
    for (const btn of pipelineBox.querySelectorAll("button")) {
      (btn as HTMLButtonElement).disabled = disabled;
    }
  });

  calBtn.onclick = () => {
    if (client.store.state.calibration === "calibrating") {
      controls.endCalibration();
    } else {
      controls.startCalibration();
    }
  };
  gainSlider.oninput = () => controls.setGain(parseFloat(gainSlider.value));
  tracesToggle.onchange = () => {
    controls.toggleTraces(tracesToggle.checked);
    if (!tracesToggle.checked) strip?.clear();
  };
  sourcesToggle.onchange = () => controls.toggleSources(sourcesToggle.checked);

  client.connect();
}

window.addEventListener("load", main);

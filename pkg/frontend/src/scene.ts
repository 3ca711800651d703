// Three.js head scene: a scalp dome textured with the streamed field, a
// simple face with blinking eyes, per-electrode decals, and an optional
// cortex point cloud beside the head. Free orbit replaces picking the
// physical figurine up.

import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";

import { colorizeGrid, decalColor, mapColor, nearestFallbackField } from "./colorize";
import type { FrameMessage, HelloMessage } from "./protocol";
import { decodeF32, decodeU8 } from "./protocol";

const HEAD_RADIUS_UV = 0.45;

/** Head-frame (x right, y nose, z up) -> scene frame (y up, nose to camera). */
function toScene(p: [number, number, number]): THREE.Vector3 {
  return new THREE.Vector3(p[0], p[2], p[1]);
}

/** Scalp dome whose uv chart equals the montage texture chart
 * (azimuthal-equidistant about the vertex, ring at radius 0.45). */
function buildScalpGeometry(radial = 48, around = 96): THREE.BufferGeometry {
  const positions: number[] = [];
  const uvs: number[] = [];
  const index: number[] = [];
  for (let i = 0; i <= radial; i++) {
    const theta = (i / radial) * (Math.PI / 2);
    for (let j = 0; j <= around; j++) {
      const az = (j / around) * 2 * Math.PI;
      positions.push(
        Math.sin(theta) * Math.sin(az),
        Math.cos(theta),
        Math.sin(theta) * Math.cos(az),
      );
      const r = HEAD_RADIUS_UV * (theta / (Math.PI / 2));
      uvs.push(0.5 + r * Math.sin(az), 0.5 - r * Math.cos(az));
    }
  }
  const cols = around + 1;
  for (let i = 0; i < radial; i++) {
    for (let j = 0; j < around; j++) {
      const a = i * cols + j;
      const b = a + cols;
      index.push(a, b, a + 1, b, b + 1, a + 1);
    }
  }
  const geo = new THREE.BufferGeometry();
  geo.setAttribute("position", new THREE.Float32BufferAttribute(positions, 3));
  geo.setAttribute("uv", new THREE.Float32BufferAttribute(uvs, 2));
  geo.setIndex(index);
  geo.computeVertexNormals();
  return geo;
}

export class HeadScene {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private controls: OrbitControls;
  private texture: THREE.DataTexture;
  private texData: Uint8ClampedArray;
  private decals: THREE.Mesh[] = [];
  private decalMaterials: THREE.MeshBasicMaterial[] = [];
  private eyelids: THREE.Mesh[] = [];
  private cortex: THREE.Points | null = null;
  private cortexColors: Float32Array | null = null;
  private nearest: Uint8Array;
  private labelIndex = new Map<string, number>();

  constructor(
    canvas: HTMLCanvasElement,
    private hello: HelloMessage,
  ) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    this.camera = new THREE.PerspectiveCamera(
      40,
      canvas.clientWidth / canvas.clientHeight,
      0.1,
      50,
    );
    this.camera.position.set(0.6, 1.2, 3.2);
    this.controls = new OrbitControls(this.camera, canvas);
    this.controls.enableDamping = true;
    this.scene.background = new THREE.Color(0x10131a);
    this.scene.add(new THREE.AmbientLight(0xffffff, 1.1));
    const key = new THREE.DirectionalLight(0xffffff, 1.4);
    key.position.set(2, 4, 3);
    this.scene.add(key);

    const { width, height } = hello.grid;
    this.nearest = decodeU8(hello.grid.nearest);
    this.texData = new Uint8ClampedArray(width * height * 4);
    this.texture = new THREE.DataTexture(
      this.texData,
      width,
      height,
      THREE.RGBAFormat,
    );
    this.texture.needsUpdate = true;

    this.buildHead();
    this.buildDecals();
    hello.montage.labels.forEach((l, i) => this.labelIndex.set(l, i));
    if (hello.sources.available) {
      this.buildCortex(decodeF32(hello.sources.positions));
    }
    this.resize();
    window.addEventListener("resize", () => this.resize());
  }

  private buildHead(): void {
    const scalp = new THREE.Mesh(
      buildScalpGeometry(),
      new THREE.MeshBasicMaterial({ map: this.texture }),
    );
    this.scene.add(scalp);

    // lower head and a simple child-like face
    const skin = new THREE.MeshLambertMaterial({ color: 0xf0c8a0 });
    const lower = new THREE.Mesh(
      new THREE.SphereGeometry(1, 48, 24, 0, 2 * Math.PI, Math.PI / 2, Math.PI / 2),
      skin,
    );
    this.scene.add(lower);

    for (const side of [-1, 1]) {
      const az = (side * 16 * Math.PI) / 180;
      const theta = (108 * Math.PI) / 180;
      const center = new THREE.Vector3(
        Math.sin(theta) * Math.sin(az),
        Math.cos(theta),
        Math.sin(theta) * Math.cos(az),
      );
      const white = new THREE.Mesh(
        new THREE.SphereGeometry(0.11, 24, 16),
        new THREE.MeshLambertMaterial({ color: 0xffffff }),
      );
      white.position.copy(center.clone().multiplyScalar(0.98));
      this.scene.add(white);
      const pupil = new THREE.Mesh(
        new THREE.SphereGeometry(0.05, 16, 12),
        new THREE.MeshBasicMaterial({ color: 0x202428 }),
      );
      pupil.position.copy(center.clone().multiplyScalar(1.06));
      this.scene.add(pupil);
      const lid = new THREE.Mesh(
        new THREE.SphereGeometry(0.12, 24, 16),
        skin,
      );
      lid.position.copy(center.clone().multiplyScalar(1.0));
      lid.visible = false;
      this.scene.add(lid);
      this.eyelids.push(lid);
    }
  }

  private buildDecals(): void {
    const { labels, pos } = this.hello.montage;
    for (let i = 0; i < labels.length; i++) {
      const mat = new THREE.MeshBasicMaterial({ color: 0x808080 });
      const mesh = new THREE.Mesh(new THREE.CircleGeometry(0.035, 20), mat);
      const p = toScene(pos[i]).multiplyScalar(1.012);
      mesh.position.copy(p);
      mesh.lookAt(p.clone().multiplyScalar(2));
      this.scene.add(mesh);
      this.decals.push(mesh);
      this.decalMaterials.push(mat);
    }
  }

  private buildCortex(positions: Float32Array): void {
    const n = positions.length / 3;
    const scenePos = new Float32Array(n * 3);
    for (let i = 0; i < n; i++) {
      scenePos[i * 3] = positions[i * 3] + 2.6; // beside the head
      scenePos[i * 3 + 1] = positions[i * 3 + 2];
      scenePos[i * 3 + 2] = positions[i * 3 + 1];
    }
    this.cortexColors = new Float32Array(n * 3).fill(0.35);
    const geo = new THREE.BufferGeometry();
    geo.setAttribute("position", new THREE.BufferAttribute(scenePos, 3));
    geo.setAttribute("color", new THREE.BufferAttribute(this.cortexColors, 3));
    this.cortex = new THREE.Points(
      geo,
      new THREE.PointsMaterial({ size: 0.05, vertexColors: true }),
    );
    this.cortex.visible = false;
    this.scene.add(this.cortex);
  }

  /** Apply one frame: scalp texture, decals, eyes, optional sources. */
  updateFrame(frame: FrameMessage): void {
    const maps = this.hello.colormaps;
    const highlighted = this.hello.montage.labels.map((l) =>
      frame.highlight.includes(l),
    );

    const field = frame.grid
      ? decodeF32(frame.grid.values)
      : nearestFallbackField(frame.electrodeValues, this.nearest);
    const rgba = colorizeGrid(
      field,
      this.nearest,
      highlighted,
      frame.gain,
      frame.pipeline,
      maps,
    );
    this.texData.set(rgba);
    this.texture.needsUpdate = true;

    for (let i = 0; i < this.decals.length; i++) {
      const [r, g, b] = decalColor(
        frame.electrodeValues[i],
        highlighted[i],
        frame.gain,
        frame.pipeline,
        maps,
      );
      this.decalMaterials[i].color.setRGB(r / 255, g / 255, b / 255);
    }

    for (const lid of this.eyelids) lid.visible = frame.blink;

    if (this.cortex && this.cortexColors) {
      if (frame.sources) {
        const vals = decodeF32(frame.sources.values);
        for (let i = 0; i < vals.length; i++) {
          const [r, g, b] = mapColor(maps.diverging, vals[i]);
          this.cortexColors[i * 3] = r / 255;
          this.cortexColors[i * 3 + 1] = g / 255;
          this.cortexColors[i * 3 + 2] = b / 255;
        }
        (this.cortex.geometry.getAttribute("color") as THREE.BufferAttribute)
          .needsUpdate = true;
        this.cortex.visible = true;
      } else {
        this.cortex.visible = false;
      }
    }
  }

  private resize(): void {
    const canvas = this.renderer.domElement;
    const w = canvas.clientWidth || canvas.width;
    const h = canvas.clientHeight || canvas.height;
    this.renderer.setSize(w, h, false);
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
  }

  start(): void {
    this.renderer.setAnimationLoop(() => {
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    });
  }
}

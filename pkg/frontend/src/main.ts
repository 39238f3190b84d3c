import * as THREE from "three";
import { createStudioApp } from "./app";
import "./styles.css";

// Configuration rides on query parameters: ?server=HOST:PORT&resolution=N.
// Served by the session service itself, the default server is the page host.
const params = new URLSearchParams(window.location.search);
const server = params.get("server") ?? window.location.host;
const resolutionParam = params.get("resolution");
const resolution = resolutionParam === null ? undefined : Number(resolutionParam);

const container = document.getElementById("studio")!;
const app = createStudioApp({
  container,
  server,
  resolution: Number.isInteger(resolution) ? resolution : undefined,
});

const renderer = new THREE.WebGLRenderer({ antialias: true });
renderer.setPixelRatio(Math.min(window.devicePixelRatio, 2));
app.viewport.appendChild(renderer.domElement);

function fit(): void {
  const width = app.viewport.clientWidth;
  const height = app.viewport.clientHeight;
  renderer.setSize(width, height);
  app.graph.resize(width, height);
}
window.addEventListener("resize", fit);
fit();

function loop(): void {
  app.tick();
  renderer.render(app.graph.scene, app.graph.camera);
  requestAnimationFrame(loop);
}
requestAnimationFrame(loop);

import * as THREE from "three";
import type { HandleLayoutMsg, MeshBufferMsg, Vec3 } from "./protocol";
import type { ViewModel } from "./viewmodel";

export type HandlePart = "x" | "y" | "z" | "center";

export interface HandleHit {
  part: HandlePart;
  /** World-space center of the hit handle; grabs are anchored here so the
   * server's proximity test always agrees with what was clicked. */
  center: THREE.Vector3;
  /** Unit axis for the three end boxes, null for the center sphere. */
  axis: THREE.Vector3 | null;
}

export interface SceneGraph {
  scene: THREE.Scene;
  camera: THREE.PerspectiveCamera;
  update(vm: ViewModel): void;
  pickHandle(ndc: THREE.Vector2): HandleHit | null;
  /** Project a normalized device coordinate onto the working plane. */
  pointOnWorkingPlane(ndc: THREE.Vector2): THREE.Vector3 | null;
  setWorkingDepth(depth: number): void;
  getWorkingDepth(): number;
  resize(width: number, height: number): void;
  shellMaterial(primitiveId: string): THREE.MeshBasicMaterial | null;
  combinedGeometry(): THREE.BufferGeometry | null;
  gizmoVisible(): boolean;
}

const AXIS_COLORS: Record<Exclude<HandlePart, "center">, number> = {
  x: 0xd32f2f,
  y: 0x388e3c,
  z: 0x1976d2,
};

const AXES = {
  x: new THREE.Vector3(1, 0, 0),
  y: new THREE.Vector3(0, 1, 0),
  z: new THREE.Vector3(0, 0, 1),
};

function toGeometry(buffer: MeshBufferMsg): THREE.BufferGeometry {
  const geometry = new THREE.BufferGeometry();
  const positions = new Float32Array(buffer.vertices.length * 3);
  buffer.vertices.forEach((v, i) => positions.set(v, i * 3));
  const index = new Uint32Array(buffer.triangles.length * 3);
  buffer.triangles.forEach((t, i) => index.set(t, i * 3));
  geometry.setAttribute("position", new THREE.BufferAttribute(positions, 3));
  geometry.setIndex(new THREE.BufferAttribute(index, 1));
  geometry.computeVertexNormals();
  return geometry;
}

export function createSceneGraph(): SceneGraph {
  const scene = new THREE.Scene();
  scene.background = new THREE.Color(0x1b1f24);

  const camera = new THREE.PerspectiveCamera(50, 4 / 3, 0.05, 200);
  camera.position.set(3.2, 2.6, 6.5);
  camera.lookAt(0, 1, 0);
  camera.updateMatrixWorld();

  scene.add(new THREE.HemisphereLight(0xffffff, 0x30343c, 0.9));
  const key = new THREE.DirectionalLight(0xffffff, 1.1);
  key.position.set(4, 6, 5);
  scene.add(key);

  // The hand stand-in lives on a camera-facing depth plane; a faint grid
  // shows where pointer rays land.
  let workingDepth = 0;
  const planeGrid = new THREE.GridHelper(8, 16, 0x3a4250, 0x2a303a);
  planeGrid.rotation.x = Math.PI / 2;
  planeGrid.position.z = workingDepth;
  scene.add(planeGrid);

  const solidMaterial = new THREE.MeshStandardMaterial({
    color: 0xb0bec5,
    flatShading: true,
    metalness: 0.05,
    roughness: 0.75,
  });
  let combined: THREE.Mesh | null = null;
  const shells = new Map<string, THREE.Mesh>();
  const gizmo = new THREE.Group();
  gizmo.visible = false;
  scene.add(gizmo);

  const raycaster = new THREE.Raycaster();
  const plane = new THREE.Plane(new THREE.Vector3(0, 0, 1), -workingDepth);

  let seenMeshVersion = -1;
  let seenStateVersion = -1;
  let gizmoKey = "";

  function rebuildMeshes(vm: ViewModel): void {
    const msg = vm.mesh;
    if (!msg) return;
    if (combined) {
      scene.remove(combined);
      combined.geometry.dispose();
    }
    combined = new THREE.Mesh(toGeometry(msg.combined), solidMaterial);
    combined.name = "combined";
    scene.add(combined);
    for (const [pid, mesh] of shells) {
      scene.remove(mesh);
      mesh.geometry.dispose();
      (mesh.material as THREE.Material).dispose();
      shells.delete(pid);
    }
    for (const [pid, buffer] of Object.entries(msg.shells)) {
      const material = new THREE.MeshBasicMaterial({
        color: vm.tintOf(pid),
        transparent: true,
        opacity: 0.3,
        depthWrite: false,
      });
      const mesh = new THREE.Mesh(toGeometry(buffer), material);
      mesh.name = `shell:${pid}`;
      shells.set(pid, mesh);
      scene.add(mesh);
    }
  }

  function retint(vm: ViewModel): void {
    for (const [pid, mesh] of shells) {
      (mesh.material as THREE.MeshBasicMaterial).color.setHex(vm.tintOf(pid));
    }
  }

  function rebuildGizmo(layout: HandleLayoutMsg | null): void {
    const key = layout === null ? "" : JSON.stringify(layout);
    if (key === gizmoKey) return;
    gizmoKey = key;
    gizmo.clear();
    gizmo.visible = layout !== null;
    if (layout === null) return;
    const origin = new THREE.Vector3(...layout.origin);
    for (const part of ["x", "y", "z"] as const) {
      const boxCenter = new THREE.Vector3(...(layout.axis_box_centers[part] as Vec3));
      const lineGeometry = new THREE.BufferGeometry().setFromPoints([origin, boxCenter]);
      gizmo.add(new THREE.Line(lineGeometry, new THREE.LineBasicMaterial({ color: AXIS_COLORS[part] })));
      const size = layout.box_half * 2;
      const box = new THREE.Mesh(
        new THREE.BoxGeometry(size, size, size),
        new THREE.MeshBasicMaterial({ color: AXIS_COLORS[part] }),
      );
      box.position.copy(boxCenter);
      box.userData.part = part;
      gizmo.add(box);
    }
    const sphere = new THREE.Mesh(
      new THREE.SphereGeometry(layout.sphere_radius, 24, 16),
      new THREE.MeshBasicMaterial({ color: 0xfdd835 }),
    );
    sphere.position.copy(origin);
    sphere.userData.part = "center";
    gizmo.add(sphere);
  }

  return {
    scene,
    camera,

    update(vm: ViewModel): void {
      if (vm.meshVersion !== seenMeshVersion) {
        seenMeshVersion = vm.meshVersion;
        rebuildMeshes(vm);
      }
      if (vm.stateVersion !== seenStateVersion) {
        seenStateVersion = vm.stateVersion;
        retint(vm);
        rebuildGizmo(vm.state?.handle_layout ?? null);
      }
    },

    pickHandle(ndc: THREE.Vector2): HandleHit | null {
      if (!gizmo.visible) return null;
      gizmo.updateMatrixWorld(true);
      raycaster.setFromCamera(ndc, camera);
      const handles = gizmo.children.filter((c) => c.userData.part !== undefined);
      const hits = raycaster.intersectObjects(handles, false);
      if (hits.length === 0) return null;
      const part = hits[0].object.userData.part as HandlePart;
      return {
        part,
        center: hits[0].object.position.clone(),
        axis: part === "center" ? null : AXES[part].clone(),
      };
    },

    pointOnWorkingPlane(ndc: THREE.Vector2): THREE.Vector3 | null {
      raycaster.setFromCamera(ndc, camera);
      const out = new THREE.Vector3();
      return raycaster.ray.intersectPlane(plane, out) ? out : null;
    },

    setWorkingDepth(depth: number): void {
      workingDepth = Math.max(-6, Math.min(6, depth));
      plane.constant = -workingDepth;
      planeGrid.position.z = workingDepth;
    },

    getWorkingDepth(): number {
      return workingDepth;
    },

    resize(width: number, height: number): void {
      camera.aspect = width / Math.max(1, height);
      camera.updateProjectionMatrix();
    },

    shellMaterial(primitiveId: string): THREE.MeshBasicMaterial | null {
      const mesh = shells.get(primitiveId);
      return mesh ? (mesh.material as THREE.MeshBasicMaterial) : null;
    },

    combinedGeometry(): THREE.BufferGeometry | null {
      return combined ? combined.geometry : null;
    },

    gizmoVisible(): boolean {
      return gizmo.visible;
    },
  };
}

/**
 * The reactive sphere. A single mesh whose vertex shader displaces the
 * surface with value noise (amplitude = displacement, frequency =
 * granularity) and whose fragment shader mixes diffuse shading, a
 * roughness-controlled specular term, and an emissive glow.
 *
 * The render loop is driven by requestAnimationFrame and only ever reads
 * the latest queued frame; ingestion never waits on rendering.
 */

import * as THREE from "three";

import { SceneParams } from "./renderParams.js";

const VERTEX_SHADER = /* glsl */ `
  uniform float uTime;
  uniform float uDisplacement;
  uniform float uNoiseFrequency;

  varying vec3 vNormal;
  varying vec3 vViewDir;

  // value noise over a lattice, cheap and stable across GPUs
  float hash(vec3 p) {
    return fract(sin(dot(p, vec3(127.1, 311.7, 74.7))) * 43758.5453123);
  }
  float noise(vec3 p) {
    vec3 i = floor(p);
    vec3 f = fract(p);
    vec3 u = f * f * (3.0 - 2.0 * f);
    float n000 = hash(i);
    float n100 = hash(i + vec3(1.0, 0.0, 0.0));
    float n010 = hash(i + vec3(0.0, 1.0, 0.0));
    float n110 = hash(i + vec3(1.0, 1.0, 0.0));
    float n001 = hash(i + vec3(0.0, 0.0, 1.0));
    float n101 = hash(i + vec3(1.0, 0.0, 1.0));
    float n011 = hash(i + vec3(0.0, 1.0, 1.0));
    float n111 = hash(i + vec3(1.0, 1.0, 1.0));
    return mix(mix(mix(n000, n100, u.x), mix(n010, n110, u.x), u.y),
               mix(mix(n001, n101, u.x), mix(n011, n111, u.x), u.y), u.z);
  }

  void main() {
    float n = noise(normal * uNoiseFrequency + vec3(0.0, uTime * 0.35, 0.0));
    vec3 displaced = position + normal * (n - 0.5) * 2.0 * uDisplacement;
    vec4 viewPos = modelViewMatrix * vec4(displaced, 1.0);
    vNormal = normalize(normalMatrix * normal);
    vViewDir = normalize(-viewPos.xyz);
    gl_Position = projectionMatrix * viewPos;
  }
`;

const FRAGMENT_SHADER = /* glsl */ `
  uniform vec3 uColor;
  uniform float uEmissive;
  uniform float uRoughness;

  varying vec3 vNormal;
  varying vec3 vViewDir;

  void main() {
    vec3 lightDir = normalize(vec3(0.6, 0.8, 0.75));
    vec3 normal = normalize(vNormal);
    float diffuse = max(dot(normal, lightDir), 0.0);
    // rough surfaces get a broad dim highlight, smooth ones a tight bright one
    float shininess = mix(96.0, 4.0, uRoughness);
    vec3 halfVec = normalize(lightDir + normalize(vViewDir));
    float specular = pow(max(dot(normal, halfVec), 0.0), shininess) * (1.0 - 0.8 * uRoughness);
    vec3 base = uColor * (0.25 + 0.75 * diffuse) + vec3(specular * 0.6);
    vec3 glow = uColor * uEmissive * 0.9;
    gl_FragColor = vec4(base + glow, 1.0);
  }
`;

export class SphereRenderer {
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private renderer: THREE.WebGLRenderer;
  private mesh: THREE.Mesh;
  private material: THREE.ShaderMaterial;
  private pending: SceneParams | null = null;
  private frameHandle = 0;
  private startTime = performance.now();
  /** Render-loop frame counter, exposed for coarse fps reporting. */
  framesDrawn = 0;

  constructor(private readonly canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(45, 1, 0.1, 50);
    this.camera.position.set(0, 0, 6);

    this.material = new THREE.ShaderMaterial({
      vertexShader: VERTEX_SHADER,
      fragmentShader: FRAGMENT_SHADER,
      uniforms: {
        uTime: { value: 0 },
        uDisplacement: { value: 0 },
        uNoiseFrequency: { value: 1.5 },
        uColor: { value: new THREE.Color(0.2, 0.2, 0.25) },
        uEmissive: { value: 0 },
        uRoughness: { value: 0.5 },
      },
    });
    this.mesh = new THREE.Mesh(new THREE.IcosahedronGeometry(1.0, 48), this.material);
    this.scene.add(this.mesh);
    this.resize();
  }

  resize(): void {
    const width = this.canvas.clientWidth || 800;
    const height = this.canvas.clientHeight || 600;
    this.renderer.setSize(width, height, false);
    this.camera.aspect = width / height;
    this.camera.updateProjectionMatrix();
  }

  /** Queue the newest frame; the render loop picks it up (SPSC, depth 1). */
  submit(params: SceneParams): void {
    this.pending = params;
  }

  startLoop(): void {
    const tick = () => {
      this.frameHandle = requestAnimationFrame(tick);
      this.drawOnce();
    };
    this.frameHandle = requestAnimationFrame(tick);
  }

  stopLoop(): void {
    cancelAnimationFrame(this.frameHandle);
  }

  drawOnce(): void {
    const params = this.pending;
    if (params) {
      this.pending = null;
      const u = this.material.uniforms;
      (u.uColor.value as THREE.Color).setRGB(...params.color);
      u.uEmissive.value = params.emissiveIntensity;
      u.uRoughness.value = params.roughness;
      u.uDisplacement.value = params.displacementAmplitude;
      u.uNoiseFrequency.value = params.noiseFrequency;
      this.mesh.scale.setScalar(params.scale);
    }
    this.material.uniforms.uTime.value = (performance.now() - this.startTime) / 1000;
    this.mesh.rotation.y += 0.0015;
    this.renderer.render(this.scene, this.camera);
    this.framesDrawn += 1;
  }
}

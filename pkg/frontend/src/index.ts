/**
 * TypeScript bindings for the portnav vessel simulator.
 *
 * Each ShipSimEnv owns one Python bridge child process speaking
 * newline-delimited JSON over stdio, giving reset/step/setVesselParams with
 * values numerically identical to the native environment (doubles round-trip
 * exactly through JSON).  One instance = one environment; instances are not
 * safe for concurrent overlapping calls but many may coexist.
 */
import { ChildProcessWithoutNullStreams, spawn } from "node:child_process";
import { createInterface, Interface } from "node:readline";
import { fileURLToPath } from "node:url";
import path from "node:path";

export interface StepInfo {
  collision: boolean;
  goal: boolean;
  distance_to_goal: number;
}

export interface StepResult {
  observation: number[];
  reward: number;
  terminated: boolean;
  truncated: boolean;
  info: StepInfo;
}

export interface VesselParamsPatch {
  mass?: number;
  turn_rate?: number;
  thrust_max?: number;
  speed_max?: number;
  angular_rate_max?: number;
  dt?: number;
}

export interface ShipSimEnvOptions {
  /** YAML config file understood by the simulator; defaults apply when omitted. */
  configPath?: string;
  /** Dotted config overrides, e.g. {"world.n_static": [0, 0]}. */
  overrides?: Record<string, unknown>;
  pythonBin?: string;
  bridgePath?: string;
}

export class NativeError extends Error {
  constructor(public readonly type: string, message: string) {
    super(`${type}: ${message}`);
    this.name = "NativeError";
  }
}

interface Pending {
  resolve: (value: Record<string, unknown>) => void;
  reject: (err: Error) => void;
}

const HERE = path.dirname(fileURLToPath(import.meta.url));

export class ShipSimEnv {
  private child: ChildProcessWithoutNullStreams;
  private reader: Interface;
  private pending = new Map<number, Pending>();
  private nextId = 1;
  private closed = false;
  private stderrTail = "";
  private configInfo: { config: Record<string, unknown>; config_hash: string; obs_dim: number } | null = null;

  private constructor(child: ChildProcessWithoutNullStreams) {
    this.child = child;
    this.reader = createInterface({ input: child.stdout });
    this.reader.on("line", (line) => this.onLine(line));
    child.stderr.on("data", (chunk) => {
      this.stderrTail = (this.stderrTail + String(chunk)).slice(-4000);
    });
    child.on("exit", () => {
      this.closed = true;
      const err = new Error(`bridge exited${this.stderrTail ? `: ${this.stderrTail.trim()}` : ""}`);
      for (const p of this.pending.values()) p.reject(err);
      this.pending.clear();
    });
  }

  /** Spawn a bridge process and wait for its config handshake. */
  static async create(options: ShipSimEnvOptions = {}): Promise<ShipSimEnv> {
    const python = options.pythonBin ?? "python3";
    const bridge = options.bridgePath ?? path.join(HERE, "..", "src", "bridge.py");
    const args = [bridge];
    if (options.configPath) args.push("--config", options.configPath);
    for (const [key, value] of Object.entries(options.overrides ?? {})) {
      args.push("--set", `${key}=${JSON.stringify(value)}`);
    }
    const child = spawn(python, args, { stdio: ["pipe", "pipe", "pipe"] });
    const env = new ShipSimEnv(child);
    const info = await env.request("config", {});
    env.configInfo = info as ShipSimEnv["configInfo"];
    return env;
  }

  private onLine(line: string): void {
    if (!line.trim()) return;
    const msg = JSON.parse(line) as { id: number; ok: boolean; error?: { type: string; message: string } };
    const pending = this.pending.get(msg.id);
    if (!pending) return;
    this.pending.delete(msg.id);
    if (msg.ok) {
      pending.resolve(msg as unknown as Record<string, unknown>);
    } else {
      pending.reject(new NativeError(msg.error?.type ?? "Error", msg.error?.message ?? "unknown bridge error"));
    }
  }

  private request(op: string, fields: Record<string, unknown>): Promise<Record<string, unknown>> {
    if (this.closed) return Promise.reject(new Error("environment is closed"));
    const id = this.nextId++;
    const payload = JSON.stringify({ id, op, ...fields });
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.child.stdin.write(payload + "\n", (err) => {
        if (err) {
          this.pending.delete(id);
          reject(err);
        }
      });
    });
  }

  /** Resolved simulator configuration (after file + overrides). */
  config(): { config: Record<string, unknown>; config_hash: string; obs_dim: number } {
    if (!this.configInfo) throw new Error("environment not initialized");
    return this.configInfo;
  }

  get obsDim(): number {
    return this.config().obs_dim;
  }

  async reset(seed: number): Promise<number[]> {
    const res = await this.request("reset", { seed });
    return res.observation as number[];
  }

  async step(action: [number, number]): Promise<StepResult> {
    const res = await this.request("step", { action });
    return {
      observation: res.observation as number[],
      reward: res.reward as number,
      terminated: res.terminated as boolean,
      truncated: res.truncated as boolean,
      info: res.info as unknown as StepInfo,
    };
  }

  async setVesselParams(params: VesselParamsPatch): Promise<void> {
    await this.request("set_vessel_params", { params });
  }

  async close(): Promise<void> {
    if (this.closed) return;
    try {
      await this.request("close", {});
    } catch {
      // the process may already be gone; killing below is the fallback
    }
    this.closed = true;
    this.child.kill();
  }
}

/**
 * Typed client for the workbench HTTP API.
 *
 * Evaluations are serialised: at most one POST /evaluate is in flight, and
 * further commits queue behind it in order. A failed request rejects its
 * own caller but leaves the queue usable.
 */

export interface TerrainDoc {
  name: string;
  width: number;
  height: number;
  cell_size: number;
  altitudes: number[];
}

export interface EvaluateDoc {
  fitness: number;
  covered: number;
  coverage_map: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

type FetchFn = typeof fetch;

async function expectOk(response: Response): Promise<Response> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const doc = await response.json();
      if (doc && typeof doc.detail === "string") detail = doc.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(response.status, detail);
  }
  return response;
}

export class ApiClient {
  private tail: Promise<unknown> = Promise.resolve();

  constructor(
    readonly baseUrl: string,
    readonly session: string,
    private readonly fetchFn: FetchFn = (...args) => fetch(...args),
  ) {}

  private url(path: string, withSession = true): string {
    const u = this.baseUrl.replace(/\/$/, "") + path;
    return withSession ? `${u}?session=${encodeURIComponent(this.session)}` : u;
  }

  async terrain(): Promise<TerrainDoc> {
    const r = await expectOk(await this.fetchFn(this.url("/terrain", false)));
    return r.json();
  }

  evaluate(vector: number[]): Promise<EvaluateDoc> {
    const task = this.tail.then(() => this.postEvaluate(vector));
    this.tail = task.catch(() => undefined);
    return task;
  }

  private async postEvaluate(vector: number[]): Promise<EvaluateDoc> {
    const r = await expectOk(
      await this.fetchFn(this.url("/evaluate"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ vector }),
      }),
    );
    return r.json();
  }

  /** Raw server log text; exported verbatim so files match byte for byte. */
  async sessionLog(): Promise<string> {
    const r = await expectOk(await this.fetchFn(this.url("/session/log")));
    return r.text();
  }

  async reset(): Promise<void> {
    await expectOk(
      await this.fetchFn(this.url("/session/reset"), { method: "POST" }),
    );
  }

  async trajectoryCsv(algo: string): Promise<string> {
    const path = `/trajectories/${encodeURIComponent(algo)}.csv`;
    const r = await expectOk(await this.fetchFn(this.url(path, false)));
    return r.text();
  }
}

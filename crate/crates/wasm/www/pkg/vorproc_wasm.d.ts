/* tslint:disable */
/* eslint-disable */

/**
 * A replacement chain on the unit square or torus that the page advances
 * in small batches.
 */
export class PlanarChain {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Performs `k` replacement steps.
     */
    advance(k: number): void;
    /**
     * Cell `i` as `[x0, y0, x1, y1, ...]`; on the torus the ring may leave
     * the unit square and should be drawn with its periodic copies.
     */
    cell_polygon(i: number): Float64Array;
    /**
     * Quadrat variance-to-mean ratio on a 10 by 10 grid.
     */
    clustering_index(): number;
    is_empty(): boolean;
    is_torus(): boolean;
    len(): number;
    /**
     * `selection` is `"volume"` for `S(v) = v^param` or `"neighbor"` for
     * `S(d) = 0.1 + (d - param)^2`.
     */
    constructor(torus: boolean, n: number, selection: string, param: number, seed: number);
    /**
     * Generator coordinates as `[x0, y0, x1, y1, ...]`.
     */
    points(): Float64Array;
    /**
     * Current selection probability of every cell.
     */
    probabilities(): Float64Array;
    steps(): number;
    thiel_redundancy(): number;
}

/**
 * Runs the v-process `S(v) = v^alpha` on the unit circle and returns an
 * RGBA image `bins` wide with one row per step, time increasing downward.
 * Occupied bins are dark.
 */
export function spacetime_raster(alpha: number, n: number, steps: number, bins: number, seed: number): Uint8Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_planarchain_free: (a: number, b: number) => void;
    readonly planarchain_advance: (a: number, b: number) => [number, number];
    readonly planarchain_cell_polygon: (a: number, b: number) => [number, number];
    readonly planarchain_clustering_index: (a: number) => number;
    readonly planarchain_is_empty: (a: number) => number;
    readonly planarchain_is_torus: (a: number) => number;
    readonly planarchain_len: (a: number) => number;
    readonly planarchain_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly planarchain_points: (a: number) => [number, number];
    readonly planarchain_probabilities: (a: number) => [number, number];
    readonly planarchain_steps: (a: number) => number;
    readonly planarchain_thiel_redundancy: (a: number) => number;
    readonly spacetime_raster: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;

/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_planarchain_free: (a: number, b: number) => void;
export const planarchain_advance: (a: number, b: number) => [number, number];
export const planarchain_cell_polygon: (a: number, b: number) => [number, number];
export const planarchain_clustering_index: (a: number) => number;
export const planarchain_is_empty: (a: number) => number;
export const planarchain_is_torus: (a: number) => number;
export const planarchain_len: (a: number) => number;
export const planarchain_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const planarchain_points: (a: number) => [number, number];
export const planarchain_probabilities: (a: number) => [number, number];
export const planarchain_steps: (a: number) => number;
export const planarchain_thiel_redundancy: (a: number) => number;
export const spacetime_raster: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;

/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const dirichlet_field: (a: number, b: number) => [number, number, number, number];
export const mnd_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const mnd_grid: (a: number) => [number, number];
export const pdf_verdict: (a: number, b: number, c: bigint, d: bigint, e: number, f: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;

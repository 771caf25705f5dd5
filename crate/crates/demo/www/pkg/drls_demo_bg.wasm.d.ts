/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_instance_free: (a: number, b: number) => void;
export const instance_cols: (a: number) => number;
export const instance_errorCurve: (a: number, b: number) => [number, number, number, number];
export const instance_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const instance_ratioHistogram: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const instance_rows: (a: number) => number;
export const instance_scorePairs: (a: number, b: number) => [number, number, number, number];
export const instance_selection: (a: number, b: number, c: number) => [number, number, number, number];
export const ratioLowerBound: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;

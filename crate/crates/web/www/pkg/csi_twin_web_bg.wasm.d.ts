/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_linkdemo_free: (a: number, b: number) => void;
export const acf_curves: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
export const linkdemo_conventional_bits: (a: number) => number;
export const linkdemo_conventional_mse: (a: number) => number;
export const linkdemo_conventional_snr_db: (a: number) => number;
export const linkdemo_conventional_trace: (a: number) => [number, number];
export const linkdemo_fallback: (a: number) => number;
export const linkdemo_proposed_bits: (a: number) => number;
export const linkdemo_proposed_mse: (a: number) => number;
export const linkdemo_proposed_snr_db: (a: number) => number;
export const linkdemo_proposed_trace: (a: number) => [number, number];
export const linkdemo_truth: (a: number) => [number, number];
export const quantizer_staircase: (a: number, b: number, c: number) => [number, number, number, number];
export const simulate_link: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;

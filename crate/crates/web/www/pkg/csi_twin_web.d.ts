/* tslint:disable */
/* eslint-disable */

/**
 * Summary of one conventional-versus-proposed link run.
 */
export class LinkDemo {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly conventional_bits: number;
    readonly conventional_mse: number;
    readonly conventional_snr_db: number;
    readonly conventional_trace: Float64Array;
    /**
     * The trained network lost to persistence and was replaced by it.
     */
    readonly fallback: boolean;
    readonly proposed_bits: number;
    readonly proposed_mse: number;
    readonly proposed_snr_db: number;
    readonly proposed_trace: Float64Array;
    /**
     * Real part of entry (1,1) of the true channel per operational slot.
     */
    readonly truth: Float64Array;
}

/**
 * Theoretical `J0(2π f_m n)` for lags `0..=max_lag`, followed by the
 * empirical autocorrelation of entry (1,1) of a generated sequence.
 */
export function acf_curves(fm: number, order: number, slots: number, max_lag: number, seed: bigint): Float64Array;

/**
 * Quantizer output for `points` inputs evenly spread over `[-1.5r, 1.5r]`,
 * as interleaved `(x, Q(x))` pairs.
 */
export function quantizer_staircase(bits: number, range: number, points: number): Float64Array;

/**
 * Runs both schemes on one 1×2 channel: `warmup` slots of training data,
 * then `slots` operational slots at `bits` per real component.
 */
export function simulate_link(fm: number, bits: number, warmup: number, slots: number, epochs: number, seed: bigint): LinkDemo;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_linkdemo_free: (a: number, b: number) => void;
    readonly acf_curves: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly linkdemo_conventional_bits: (a: number) => number;
    readonly linkdemo_conventional_mse: (a: number) => number;
    readonly linkdemo_conventional_snr_db: (a: number) => number;
    readonly linkdemo_conventional_trace: (a: number) => [number, number];
    readonly linkdemo_fallback: (a: number) => number;
    readonly linkdemo_proposed_bits: (a: number) => number;
    readonly linkdemo_proposed_mse: (a: number) => number;
    readonly linkdemo_proposed_snr_db: (a: number) => number;
    readonly linkdemo_proposed_trace: (a: number) => [number, number];
    readonly linkdemo_truth: (a: number) => [number, number];
    readonly quantizer_staircase: (a: number, b: number, c: number) => [number, number, number, number];
    readonly simulate_link: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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

/* tslint:disable */
/* eslint-disable */

/**
 * Compiles formulas (one per line) against the graph in `graph_source`.
 */
export function compile_fol(formulas: string, graph_source: string): string;

/**
 * Structural difference between a candidate and a gold graph, or
 * `{"error": ...}` when either side does not parse.
 */
export function diff(candidate: string, gold: string): string;

/**
 * Report, node/link layout, DOT text and canonical source in one call.
 */
export function draw(source: string): string;

/**
 * Validation report for graph source.
 */
export function lint(source: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly compile_fol: (a: number, b: number, c: number, d: number) => [number, number];
    readonly diff: (a: number, b: number, c: number, d: number) => [number, number];
    readonly draw: (a: number, b: number) => [number, number];
    readonly lint: (a: number, b: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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

export {
  EmptySeriesError,
  SchemaError,
  column,
  parseState,
  parseTable,
  requireColumns,
} from "./csv.js";
export type { StateFile, Table } from "./csv.js";
export {
  KINDS,
  renderDecay,
  renderFgrScan,
  renderFunctionals,
  renderProfiles,
} from "./plots.js";
export type { Kind, PlotOptions } from "./plots.js";
export { renderSpec, run } from "./cli.js";

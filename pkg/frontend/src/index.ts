export { CsvError, readMatrix, readTable } from "./csv.js";
export { loadSchedule, loadSweep, loadVState, loadWigner } from "./data.js";
export type { ScheduleSegment, SweepSeries, VStateData, WignerData } from "./data.js";
export { diverging, phaseColor } from "./color.js";
export { encodePng } from "./png.js";
export {
  renderFigure,
  renderSchedule,
  renderSweep,
  renderVState,
  renderWigner,
} from "./figures.js";
export type { FigureKind, FigureSpec } from "./figures.js";
export { buildSpec, run } from "./cli.js";

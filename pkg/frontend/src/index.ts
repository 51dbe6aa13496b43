import { renderBranch, REQUIRED as BRANCH_COLUMNS } from "./figures/branch.js";
import { renderLocalization, REQUIRED as LOCALIZATION_COLUMNS } from "./figures/localization.js";
import { renderPhase, REQUIRED as PHASE_COLUMNS } from "./figures/phase.js";
import { renderSpectra, REQUIRED as SPECTRA_COLUMNS } from "./figures/spectra.js";
import { renderTrajectory, REQUIRED as TRAJECTORY_COLUMNS } from "./figures/trajectory.js";

export { SchemaError, parseCsv, requireColumns, num } from "./csv.js";
export { renderLocalization, renderPhase, renderTrajectory, renderBranch, renderSpectra };

export interface FigureKind {
  render: (csvText: string) => string;
  columns: string[];
  input: string;
}

/** Registry of figure kinds: renderer, schema, and the producing CSV. */
export const FIGURES: Record<string, FigureKind> = {
  localization: { render: renderLocalization, columns: LOCALIZATION_COLUMNS, input: "localize.csv" },
  phase: { render: renderPhase, columns: PHASE_COLUMNS, input: "sweep.csv" },
  trajectory: { render: renderTrajectory, columns: TRAJECTORY_COLUMNS, input: "flow.csv" },
  branch: { render: renderBranch, columns: BRANCH_COLUMNS, input: "equilibria.csv" },
  spectra: { render: renderSpectra, columns: SPECTRA_COLUMNS, input: "stability.csv" },
};

export * from "./schema.js";
export * from "./csv.js";
export * from "./svg.js";
export * from "./plots.js";
export * from "./tables.js";
export { main, cmdPlot, cmdTables } from "./cli.js";

/** Built-in example model: the six-state chain with p at q3. */

export const FIG3_MODEL = {
  agents: 1,
  states: ["q0", "q1", "q2", "q3", "q4", "q5"],
  props: { q0: [], q1: [], q2: [], q3: ["p"], q4: [], q5: [] },
  actions: {
    q0: { "1": ["0"] },
    q1: { "1": ["0"] },
    q2: { "1": ["0"] },
    q3: { "1": ["0"] },
    q4: { "1": ["0"] },
    q5: { "1": ["0"] },
  },
  transitions: {
    q0: { "0": "q1" },
    q1: { "0": "q2" },
    q2: { "0": "q3" },
    q3: { "0": "q4" },
    q4: { "0": "q5" },
    q5: { "0": "q5" },
  },
};

export const FIG3_DEFAULT_FORMULA = "<<>> F p";
export const FIG2_DEFAULT_FORMULA = "<<>> F p";

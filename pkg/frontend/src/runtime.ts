// Entry point loaded by every built page.

import { mount } from "./dom.js";

if (typeof document !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", () => {
      mount(document);
    });
  } else {
    mount(document);
  }
}

export { mount };

/** Browser entry point: mounts the explorer once the DOM is ready. */

import { boot } from "./main.js";

function mount(): void {
  const container = document.getElementById("app") ?? document.body.appendChild(
    document.createElement("div"),
  );
  container.id = "app";
  void boot({ container });
}

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", mount);
} else {
  mount();
}

import { ApiClient } from "./api.js";
import { Dashboard } from "./ui.js";

const root = document.getElementById("app");
if (!root) {
    throw new Error("missing #app mount point");
}

// same-origin by default; override with <meta name="cuimet-api" content="...">
const meta = document.querySelector('meta[name="cuimet-api"]');
const baseUrl = meta?.getAttribute("content") ?? "";
new Dashboard(root, new ApiClient(baseUrl));

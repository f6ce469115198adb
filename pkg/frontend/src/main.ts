/** DOM bootstrap: wires the headless sessions to the page.
 *
 * Pair text lives only in the DOM for the active item; nothing is written
 * to localStorage or kept after the session ends, since the material is
 * sensitive.
 */

import { ApiClient } from "./api.js";
import { ExpertSession } from "./expert.js";
import { ReviewerSession } from "./reviewer.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

function setText(id: string, text: string): void {
  byId(id).textContent = text;
}

function show(id: string, visible: boolean): void {
  byId(id).style.display = visible ? "" : "none";
}

function setupOnboarding(): void {
  // Exemplar pairs for the current condition render here; content comes
  // from window config so deployments can swap instructions per condition.
  const panel = byId<HTMLElement>("onboarding");
  const examples = (window as unknown as { HSCN_EXAMPLES?: string[] }).HSCN_EXAMPLES ?? [];
  if (examples.length === 0) {
    panel.style.display = "none";
    return;
  }
  byId<HTMLElement>("onboarding-list").innerHTML = examples
    .map((e) => `<li>${e.replace(/</g, "&lt;")}</li>`)
    .join("");
  byId<HTMLButtonElement>("onboarding-dismiss").addEventListener("click", () => {
    panel.style.display = "none";
  });
}

function startReviewer(api: ApiClient, annotator: string): void {
  const session = new ReviewerSession(api, annotator, undefined, undefined, (s) => {
    show("reviewer-screen", true);
    show("expert-screen", false);
    setText("rev-progress", `${s.acked} submitted${s.pendingSubmissions ? ` (${s.pendingSubmissions} pending retry)` : ""}`);
    if (s.phase === "done") {
      setText("rev-hs", "Queue empty. Thank you!");
      setText("rev-cn", "");
      return;
    }
    if (s.pair) {
      setText("rev-hs", s.pair.hs);
      setText("rev-cn", s.pair.cn);
    }
    document.querySelectorAll<HTMLButtonElement>("[data-score]").forEach((btn) => {
      btn.classList.toggle("selected", Number(btn.dataset.score) === s.selectedScore);
    });
    byId<HTMLInputElement>("rev-badhs").checked = s.badHs;
    byId<HTMLButtonElement>("rev-submit").disabled = !(s.phase === "scoring" && s.selectedScore !== null);
  });

  document.querySelectorAll<HTMLButtonElement>("[data-score]").forEach((btn) => {
    btn.addEventListener("click", () => session.selectScore(Number(btn.dataset.score) as 0 | 1 | 2 | 3));
  });
  document.addEventListener("keydown", (event) => {
    if (["0", "1", "2", "3"].includes(event.key) && session.state.phase === "scoring") {
      session.selectScore(Number(event.key) as 0 | 1 | 2 | 3);
    }
  });
  byId<HTMLInputElement>("rev-badhs").addEventListener("change", () => session.toggleBadHs());
  byId<HTMLButtonElement>("rev-submit").addEventListener("click", async () => {
    const ack = await session.submit();
    if (ack !== null) {
      await session.next();
    }
  });
  window.addEventListener("online", () => {
    void session.flushPending().then(async () => {
      if (session.state.phase === "idle") {
        await session.next();
      }
    });
  });
  void session.next();
}

function startExpert(api: ApiClient, operator: string): void {
  const session = new ExpertSession(api, operator, undefined, undefined, undefined, (s) => {
    show("reviewer-screen", false);
    show("expert-screen", true);
    setText("exp-progress", `${s.acked} decided${s.pendingSubmissions ? ` (${s.pendingSubmissions} pending retry)` : ""}`);
    if (s.phase === "done") {
      setText("exp-hs", "Session complete. Thank you!");
      setText("exp-cn", "");
      show("exp-edit-area", false);
      return;
    }
    if (s.item) {
      setText("exp-condition", s.item.condition);
      setText("exp-hs", s.item.pair.hs);
      setText("exp-cn", s.item.pair.cn);
    }
    show("exp-edit-area", s.editing);
    byId<HTMLButtonElement>("exp-save-edit").disabled = !s.canSubmitEdit;
  });

  byId<HTMLButtonElement>("exp-validate").addEventListener("click", async () => {
    if ((await session.validate()) !== null) {
      await session.next();
    }
  });
  byId<HTMLButtonElement>("exp-discard").addEventListener("click", async () => {
    if ((await session.discard()) !== null) {
      await session.next();
    }
  });
  byId<HTMLButtonElement>("exp-edit").addEventListener("click", () => {
    session.startEdit();
    const box = byId<HTMLTextAreaElement>("exp-editbox");
    box.value = session.state.editedText;
    box.focus();
  });
  byId<HTMLTextAreaElement>("exp-editbox").addEventListener("input", (event) => {
    session.setEditedText((event.target as HTMLTextAreaElement).value);
  });
  byId<HTMLButtonElement>("exp-save-edit").addEventListener("click", async () => {
    if ((await session.submitEdit()) !== null) {
      await session.next();
    }
  });
  window.addEventListener("online", () => {
    void session.flushPending().then(async () => {
      if (session.state.phase === "idle") {
        await session.next();
      }
    });
  });
  void session.next();
}

export function boot(): void {
  setupOnboarding();
  byId<HTMLButtonElement>("start").addEventListener("click", () => {
    const server = byId<HTMLInputElement>("server").value || "http://127.0.0.1:8800";
    const role = byId<HTMLSelectElement>("role").value;
    const subject = byId<HTMLInputElement>("subject").value.trim();
    if (!subject) {
      alert("enter your annotator / operator id");
      return;
    }
    const api = new ApiClient(server);
    show("login", false);
    if (role === "reviewer") {
      startReviewer(api, subject);
    } else {
      startExpert(api, subject);
    }
  });
}

if (typeof document !== "undefined" && document.getElementById("start")) {
  boot();
}

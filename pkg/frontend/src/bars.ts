// Confidence bars: one row per candidate sense, width straight from the
// last response value.

export function renderBars(root: HTMLElement, bars: Record<string, number>) {
  const entries = Object.entries(bars).sort((a, b) => b[1] - a[1]);
  root.innerHTML = entries
    .map(([sid, conf]) => {
      const pct = (conf * 100).toFixed(1);
      const fill = sid.startsWith("new@") ? "#d4a017" : "#4a90d9";
      return `
        <div class="bar-row">
          <span class="bar-label">${sid}</span>
          <div class="bar-track">
            <div class="bar-fill" style="width:${pct}%;background:${fill}"></div>
          </div>
          <span class="bar-value">${pct}%</span>
        </div>`;
    })
    .join("");
}

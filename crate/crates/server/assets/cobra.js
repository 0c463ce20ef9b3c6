// Cobra browser client: binary protocol, operational transformation,
// slide navigation with fragment stepping, and annotation rendering.
(function () {
  "use strict";

  // ---- Operations ---------------------------------------------------------
  // Components: {r: n} retain, {i: "s"} insert, {d: n} delete. Offsets and
  // lengths count Unicode scalar values, like the server.

  function cps(s) { return Array.from(s); }
  function cpLen(s) { return cps(s).length; }

  function push(op, c) {
    var last = op[op.length - 1];
    if (c.r !== undefined) {
      if (c.r === 0) return op;
      if (last && last.r !== undefined) last.r += c.r; else op.push({ r: c.r });
    } else if (c.i !== undefined) {
      if (c.i === "") return op;
      if (last && last.i !== undefined) { last.i += c.i; }
      else if (last && last.d !== undefined) {
        var prev = op[op.length - 2];
        if (prev && prev.i !== undefined) prev.i += c.i;
        else op.splice(op.length - 1, 0, { i: c.i });
      } else op.push({ i: c.i });
    } else {
      if (c.d === 0) return op;
      if (last && last.d !== undefined) last.d += c.d; else op.push({ d: c.d });
    }
    return op;
  }

  function baseLen(op) {
    return op.reduce(function (n, c) { return n + (c.r || c.d || 0); }, 0);
  }

  function apply(op, text) {
    var chars = cps(text), out = [], pos = 0;
    op.forEach(function (c) {
      if (c.r !== undefined) { out.push(chars.slice(pos, pos + c.r).join("")); pos += c.r; }
      else if (c.i !== undefined) out.push(c.i);
      else pos += c.d;
    });
    if (pos !== chars.length) throw new Error("operation does not match document length");
    return out.join("");
  }

  function split(c, n) {
    // Returns [head of length n, rest] of a component.
    if (c.r !== undefined) return [{ r: n }, { r: c.r - n }];
    if (c.d !== undefined) return [{ d: n }, { d: c.d - n }];
    var s = cps(c.i);
    return [{ i: s.slice(0, n).join("") }, { i: s.slice(n).join("") }];
  }
  function clen(c) { return c.r !== undefined ? c.r : c.d !== undefined ? c.d : cpLen(c.i); }

  function compose(a, b) {
    var out = [], ia = 0, ib = 0, ca = a[0], cb = b[0];
    ia = 1; ib = 1;
    while (ca || cb) {
      if (ca && ca.d !== undefined) { push(out, ca); ca = a[ia++]; continue; }
      if (cb && cb.i !== undefined) { push(out, cb); cb = b[ib++]; continue; }
      if (!ca || !cb) throw new Error("cannot compose");
      var n = Math.min(clen(ca), clen(cb));
      var pa = split(ca, n), pb = split(cb, n);
      if (ca.r !== undefined && cb.r !== undefined) push(out, { r: n });
      else if (ca.i !== undefined && cb.r !== undefined) push(out, pa[0]);
      else if (ca.r !== undefined && cb.d !== undefined) push(out, { d: n });
      // insert followed by delete cancels out
      ca = clen(pa[1]) > 0 ? pa[1] : a[ia++];
      cb = clen(pb[1]) > 0 ? pb[1] : b[ib++];
    }
    return out;
  }

  // transform(a, b) -> [a', b'] with apply(b', apply(a, s)) == apply(a', apply(b, s)).
  // a's insertions win ties.
  function transform(a, b) {
    var a1 = [], b1 = [], ia = 1, ib = 1, ca = a[0], cb = b[0];
    while (ca || cb) {
      if (ca && ca.i !== undefined) { push(a1, ca); push(b1, { r: cpLen(ca.i) }); ca = a[ia++]; continue; }
      if (cb && cb.i !== undefined) { push(a1, { r: cpLen(cb.i) }); push(b1, cb); cb = b[ib++]; continue; }
      if (!ca || !cb) throw new Error("cannot transform");
      var n = Math.min(clen(ca), clen(cb));
      var pa = split(ca, n), pb = split(cb, n);
      if (ca.r !== undefined && cb.r !== undefined) { push(a1, { r: n }); push(b1, { r: n }); }
      else if (ca.d !== undefined && cb.r !== undefined) push(a1, { d: n });
      else if (ca.r !== undefined && cb.d !== undefined) push(b1, { d: n });
      ca = clen(pa[1]) > 0 ? pa[1] : a[ia++];
      cb = clen(pb[1]) > 0 ? pb[1] : b[ib++];
    }
    return [a1, b1];
  }

  function diff(oldText, newText) {
    var a = cps(oldText), b = cps(newText), p = 0, s = 0;
    while (p < a.length && p < b.length && a[p] === b[p]) p++;
    while (s < a.length - p && s < b.length - p && a[a.length - 1 - s] === b[b.length - 1 - s]) s++;
    var op = [];
    push(op, { r: p });
    push(op, { i: b.slice(p, b.length - s).join("") });
    push(op, { d: a.length - p - s });
    push(op, { r: s });
    return op;
  }

  // Insertions at the index move it when `after` is set.
  function transformIndex(op, index, after) {
    var pos = 0, out = index;
    for (var k = 0; k < op.length && pos <= index; k++) {
      var c = op[k];
      if (c.r !== undefined) { pos += c.r; if (pos > index) break; }
      else if (c.i !== undefined) { if (pos < index || after) out += cpLen(c.i); }
      else { out -= Math.min(c.d, index - pos); pos += c.d; }
    }
    return out;
  }

  // Same rules as the server: boundary insertions stay outside a range and
  // fully deleted ranges disappear.
  function transformAnnotations(list, op) {
    var out = [];
    list.forEach(function (a) {
      var s = transformIndex(op, a.start, true), e = transformIndex(op, a.end, false);
      if (a.end > a.start && e <= s) return;
      out.push(Object.assign({}, a, { start: s, end: Math.max(s, e) }));
    });
    return out;
  }

  // ---- Wire codec ---------------------------------------------------------
  var TAGS = ["ClientHello", "ServerHello", "OpenDoc", "DocState", "Edit", "Ack",
    "RemoteEdit", "Annotations", "FragmentStep", "SettingsChanged", "Error"];
  var KINDS = ["error", "warning", "info", "token"];
  var enc = new TextEncoder(), dec = new TextDecoder("utf-8", { fatal: true });

  function Writer() { this.bytes = []; }
  Writer.prototype.u = function (n) {
    do { var b = n % 128; n = Math.floor(n / 128); this.bytes.push(n > 0 ? b | 128 : b); } while (n > 0);
  };
  Writer.prototype.s = function (str) {
    var b = enc.encode(str); this.u(b.length); for (var i = 0; i < b.length; i++) this.bytes.push(b[i]);
  };
  Writer.prototype.op = function (op) {
    var self = this; self.u(op.length);
    op.forEach(function (c) {
      if (c.r !== undefined) { self.bytes.push(0); self.u(c.r); }
      else if (c.i !== undefined) { self.bytes.push(1); self.s(c.i); }
      else { self.bytes.push(2); self.u(c.d); }
    });
  };

  function Reader(buf) { this.b = new Uint8Array(buf); this.p = 0; }
  Reader.prototype.byte = function () {
    if (this.p >= this.b.length) throw new Error("truncated message"); return this.b[this.p++];
  };
  Reader.prototype.u = function () {
    var n = 0, mul = 1, b;
    do { b = this.byte(); n += (b & 127) * mul; mul *= 128; } while (b & 128);
    return n;
  };
  Reader.prototype.s = function () {
    var len = this.u(); if (this.p + len > this.b.length) throw new Error("truncated string");
    var out = dec.decode(this.b.subarray(this.p, this.p + len)); this.p += len; return out;
  };
  Reader.prototype.opt = function () { return this.byte() ? this.s() : undefined; };
  Reader.prototype.op = function () {
    var n = this.u(), op = [];
    for (var k = 0; k < n; k++) {
      var kind = this.byte();
      if (kind === 0) op.push({ r: this.u() });
      else if (kind === 1) op.push({ i: this.s() });
      else op.push({ d: this.u() });
    }
    return op;
  };

  function encode(m) {
    var w = new Writer();
    w.bytes.push(TAGS.indexOf(m.type));
    switch (m.type) {
      case "ClientHello": w.u(m.protocol_version); break;
      case "OpenDoc": w.s(m.doc_id); break;
      case "Edit": w.s(m.doc_id); w.u(m.parent_seq); w.op(m.op); break;
      case "FragmentStep": w.s(m.doc_id); w.u(m.fragment_index); w.u(m.variant_index); break;
      default: throw new Error("client does not send " + m.type);
    }
    return new Uint8Array(w.bytes);
  }

  function decode(buf) {
    var r = new Reader(buf), type = TAGS[r.byte()], m = { type: type }, n, k;
    switch (type) {
      case "ServerHello":
        m.settings_digest = r.s(); n = r.u(); m.docs = [];
        for (k = 0; k < n; k++) m.docs.push(r.s());
        break;
      case "DocState": m.doc_id = r.s(); m.seq = r.u(); m.text = r.s(); break;
      case "Ack": m.doc_id = r.s(); m.seq = r.u(); break;
      case "RemoteEdit": m.doc_id = r.s(); m.seq = r.u(); m.op = r.op(); m.author = r.u(); break;
      case "Annotations":
        m.doc_id = r.s(); m.seq = r.u(); n = r.u(); m.batch = [];
        for (k = 0; k < n; k++) {
          m.batch.push({ start: r.u(), end: r.u(), kind: KINDS[r.byte()], class: r.opt(), message: r.opt() });
        }
        break;
      case "FragmentStep": m.doc_id = r.s(); m.fragment_index = r.u(); m.variant_index = r.u(); break;
      case "SettingsChanged":
        n = r.u(); m.changes = [];
        for (k = 0; k < n; k++) m.changes.push({ path: r.s(), old: r.s(), new: r.s(), hot: r.byte() === 1 });
        break;
      case "Error": m.code = r.s(); m.message = r.s(); break;
      default: throw new Error("unexpected message tag");
    }
    return m;
  }

  // ---- Documents ----------------------------------------------------------
  var boot = JSON.parse(document.getElementById("cobra-boot").textContent);
  var docs = {};
  var socket = null;
  var presenter = true;

  function send(m) { if (socket && socket.readyState === 1) socket.send(encode(m)); }

  function Doc(info, elements) {
    this.info = info; this.elements = elements; this.seq = 0; this.text = "";
    this.outstanding = null; this.buffer = null; this.annotations = []; this.annSeq = -1;
    this.variant = info.variants.map(function () { return 0; });
    var self = this;
    elements.forEach(function (el) { self.mount(el); });
  }

  Doc.prototype.mount = function (code) {
    var wrap = document.createElement("div");
    wrap.className = "cobra-editor " + (code.className || "");
    var layer = document.createElement("pre");
    layer.className = "cobra-highlight";
    var area = document.createElement("textarea");
    area.spellcheck = false;
    area.className = "cobra-input";
    wrap.appendChild(layer); wrap.appendChild(area);
    var tip = document.createElement("div");
    tip.className = "cobra-tooltip"; wrap.appendChild(tip);
    var panel = null;
    if (wrap.classList.contains("states")) {
      panel = document.createElement("pre");
      panel.className = "cobra-state"; wrap.appendChild(panel);
    }
    code.replaceWith(wrap);
    var self = this;
    area.addEventListener("input", function () { self.localEdit(area.value); });
    area.addEventListener("scroll", function () { layer.scrollTop = area.scrollTop; layer.scrollLeft = area.scrollLeft; });
    area.addEventListener("select", function () { self.showTooltip(area, tip); });
    area.addEventListener("click", function () { self.showTooltip(area, tip); });
    area.addEventListener("keydown", function (e) { e.stopPropagation(); });
    code._cobra = { wrap: wrap, layer: layer, area: area, tip: tip, panel: panel };
    this.views = (this.views || []).concat([code._cobra]);
  };

  Doc.prototype.localEdit = function (value) {
    if (value === this.text) return;
    var op = diff(this.text, value);
    this.text = value;
    this.annotations = transformAnnotations(this.annotations, op);
    if (this.outstanding) this.buffer = this.buffer ? compose(this.buffer, op) : op;
    else { this.outstanding = op; send({ type: "Edit", doc_id: this.info.id, parent_seq: this.seq, op: op }); }
    this.render(true);
  };

  Doc.prototype.state = function (m) {
    this.seq = m.seq; this.text = m.text; this.outstanding = null; this.buffer = null;
    this.render(false);
  };

  Doc.prototype.ack = function (m) {
    this.seq = m.seq; this.outstanding = this.buffer; this.buffer = null;
    if (this.outstanding) send({ type: "Edit", doc_id: this.info.id, parent_seq: this.seq, op: this.outstanding });
  };

  Doc.prototype.remote = function (m) {
    var op = m.op, t;
    if (this.outstanding) { t = transform(this.outstanding, op); this.outstanding = t[0]; op = t[1]; }
    if (this.buffer) { t = transform(this.buffer, op); this.buffer = t[0]; op = t[1]; }
    this.seq = m.seq;
    this.text = apply(op, this.text);
    this.annotations = transformAnnotations(this.annotations, op);
    this.render(false, op);
  };

  Doc.prototype.annotate = function (m) {
    if (m.seq !== this.seq) return;
    var list = m.batch;
    if (this.outstanding) list = transformAnnotations(list, this.outstanding);
    if (this.buffer) list = transformAnnotations(list, this.buffer);
    this.annotations = list;
    this.render(true);
  };

  Doc.prototype.visible = function () {
    var cls = this.info.classes || [];
    var infos = boot.show_infos && cls.indexOf("no-infos") < 0;
    var warnings = boot.show_warnings && cls.indexOf("no-warnings") < 0;
    return this.annotations.filter(function (a) {
      return (a.kind !== "info" || infos) && (a.kind !== "warning" || warnings);
    });
  };

  // Proof states arrive as info annotations with class "state".
  Doc.prototype.proofStates = function () {
    return this.annotations.filter(function (a) {
      return a.kind === "info" && a.class === "state";
    }).sort(function (a, b) { return a.start - b.start; });
  };

  function esc(s) { return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;"); }

  Doc.prototype.highlight = function () {
    var chars = cps(this.text), n = chars.length, classes = [];
    for (var k = 0; k <= n; k++) classes.push([]);
    this.visible().forEach(function (a) {
      var c = a.kind === "token" ? "tok-" + (a.class || "plain") : "ann-" + a.kind;
      for (var p = Math.min(a.start, n); p < Math.min(a.end, n); p++) classes[p].push(c);
    });
    var out = "", cur = null, run = "";
    function flush() {
      if (run) out += cur ? '<span class="' + cur + '">' + esc(run) + "</span>" : esc(run);
      run = "";
    }
    for (var i = 0; i < n; i++) {
      var c = classes[i].join(" ");
      if (c !== cur) { flush(); cur = c; }
      run += chars[i];
    }
    flush();
    return out + "\n";
  };

  function cpToUnit(text, cp) { return cps(text).slice(0, cp).join("").length; }
  function unitToCp(text, unit) { return cpLen(text.slice(0, unit)); }

  Doc.prototype.render = function (keepValue, op) {
    var html = this.highlight(), self = this;
    (this.views || []).forEach(function (v) {
      if (!keepValue && v.area.value !== self.text) {
        var s = unitToCp(v.area.value, v.area.selectionStart), e = unitToCp(v.area.value, v.area.selectionEnd);
        if (op) { s = transformIndex(op, s, false); e = transformIndex(op, e, false); }
        v.area.value = self.text;
        if (document.activeElement === v.area) {
          v.area.setSelectionRange(cpToUnit(self.text, s), cpToUnit(self.text, e));
        }
      }
      v.layer.innerHTML = html;
      v.area.rows = Math.max(1, self.text.split("\n").length);
    });
  };

  Doc.prototype.showTooltip = function (area, tip) {
    var s = unitToCp(area.value, area.selectionStart), e = unitToCp(area.value, area.selectionEnd);
    this.tooltipAt(tip, s, e);
  };

  Doc.prototype.tooltipAt = function (tip, s, e) {
    var msgs = this.visible().filter(function (a) {
      return a.message && a.start <= e && a.end >= s;
    }).map(function (a) { return a.kind + ": " + a.message; });
    tip.textContent = msgs.join("\n");
    tip.style.display = msgs.length ? "block" : "none";
  };

  // ---- Slides and steps ---------------------------------------------------
  var slides = [], current = 0, stepIndex = [];

  function collectSlides() {
    var top = document.querySelectorAll(".reveal .slides > section");
    top.forEach(function (s) {
      var nested = s.querySelectorAll(":scope > section");
      if (nested.length) nested.forEach(function (n) { slides.push(n); });
      else slides.push(s);
    });
  }

  // Steps of a slide, in document order: reveal fragments, then advance
  // code variants of every visible document on the slide.
  function plan(slide) {
    var steps = [];
    slide.querySelectorAll(".fragment").forEach(function (el) { steps.push({ reveal: el }); });
    slide.querySelectorAll(".cobra-editor").forEach(function (wrap) {
      var doc = null;
      Object.keys(docs).forEach(function (id) {
        (docs[id].views || []).forEach(function (v) { if (v.wrap === wrap) doc = docs[id]; });
      });
      if (!doc || doc.info.hidden) return;
      doc.info.variants.forEach(function (count, f) {
        for (var v = 1; v < count; v++) steps.push({ doc: doc, fragment: f, variant: v });
      });
      var view = null;
      doc.views.forEach(function (v) { if (v.wrap === wrap) view = v; });
      if (view && view.panel) {
        doc.proofStates().forEach(function (_, k) { steps.push({ doc: doc, view: view, state: k }); });
      }
    });
    return steps;
  }

  function applyStep(step, forward) {
    if (step.reveal) { step.reveal.classList.toggle("visible", forward); return; }
    if (step.view) {
      var states = step.doc.proofStates(), k = forward ? step.state : step.state - 1;
      step.view.panel.textContent = k >= 0 && states[k] ? states[k].message || "" : "";
      step.view.panel.style.display = k >= 0 ? "block" : "none";
      return;
    }
    var variant = forward ? step.variant : step.variant - 1;
    step.doc.variant[step.fragment] = variant;
    if (presenter) send({ type: "FragmentStep", doc_id: step.doc.info.id, fragment_index: step.fragment, variant_index: variant });
  }

  function show(i) {
    current = Math.max(0, Math.min(slides.length - 1, i));
    slides.forEach(function (s, k) {
      s.classList.toggle("present", k === current);
      s.classList.toggle("past", k < current);
      s.classList.toggle("future", k > current);
    });
    if (location.hash !== "#/" + current) history.replaceState(null, "", "#/" + current);
  }

  function next() {
    var steps = plan(slides[current]), k = stepIndex[current] || 0;
    if (k < steps.length) { applyStep(steps[k], true); stepIndex[current] = k + 1; }
    else if (current < slides.length - 1) show(current + 1);
  }

  function prev() {
    var steps = plan(slides[current]), k = stepIndex[current] || 0;
    if (k > 0) { applyStep(steps[k - 1], false); stepIndex[current] = k - 1; }
    else if (current > 0) show(current - 1);
  }

  var help = null;
  function toggleHelp() {
    if (!help) {
      help = document.createElement("div");
      help.className = "cobra-help";
      help.innerHTML = "<h2>Keys</h2><table>" +
        "<tr><td>&rarr; space PgDn</td><td>next step</td></tr>" +
        "<tr><td>&larr; PgUp</td><td>previous step</td></tr>" +
        "<tr><td>Home / End</td><td>first / last slide</td></tr>" +
        "<tr><td>?</td><td>toggle this help</td></tr></table>";
      document.body.appendChild(help);
    } else help.style.display = help.style.display === "none" ? "block" : "none";
  }

  document.addEventListener("keydown", function (e) {
    if (e.key === "ArrowRight" || e.key === " " || e.key === "PageDown") { next(); e.preventDefault(); }
    else if (e.key === "ArrowLeft" || e.key === "PageUp") { prev(); e.preventDefault(); }
    else if (e.key === "Home") show(0);
    else if (e.key === "End") show(slides.length - 1);
    else if (e.key === "?") toggleHelp();
  });

  // ---- Math ---------------------------------------------------------------
  function typesetMath() {
    if (window.MathJax && window.MathJax.typeset) {
      try { window.MathJax.typeset(); } catch (err) { /* plain text fallback */ }
    }
  }

  // ---- Connection ---------------------------------------------------------
  function banner(text) {
    var b = document.getElementById("cobra-banner");
    if (!b) { b = document.createElement("div"); b.id = "cobra-banner"; document.body.appendChild(b); }
    b.textContent = text; b.style.display = text ? "block" : "none";
  }

  function connect() {
    var proto = location.protocol === "https:" ? "wss:" : "ws:";
    socket = new WebSocket(proto + "//" + location.host + "/ws");
    socket.binaryType = "arraybuffer";
    socket.onopen = function () { send({ type: "ClientHello", protocol_version: boot.protocol_version }); };
    socket.onmessage = function (ev) {
      var m;
      try { m = decode(ev.data); } catch (err) { console.error(err); return; }
      var d = docs[m.doc_id];
      switch (m.type) {
        case "ServerHello":
          banner("");
          m.docs.forEach(function (id) { if (docs[id]) send({ type: "OpenDoc", doc_id: id }); });
          break;
        case "DocState": if (d) d.state(m); break;
        case "Ack": if (d) d.ack(m); break;
        case "RemoteEdit": if (d) d.remote(m); break;
        case "Annotations": if (d) d.annotate(m); break;
        case "FragmentStep": if (d) d.variant[m.fragment_index] = m.variant_index; break;
        case "SettingsChanged":
          m.changes.forEach(function (c) {
            if (c.path === "title") document.title = c.new;
            if (c.path === "display.infos") boot.show_infos = c.new === "true";
            if (c.path === "display.warnings") boot.show_warnings = c.new === "true";
          });
          Object.keys(docs).forEach(function (id) { docs[id].render(true); });
          break;
        case "Error":
          if (m.code === "forbidden") presenter = false;
          else if (m.code === "version-mismatch") banner("Protocol mismatch: " + m.message + ". Reload the page.");
          else console.warn("cobra:", m.code, m.message);
          break;
      }
    };
    socket.onclose = function () {
      banner("Connection lost, reconnecting...");
      setTimeout(connect, 1000);
    };
  }

  function init() {
    boot.docs.forEach(function (info) {
      var els = Array.prototype.slice.call(document.querySelectorAll('code[data-doc="' + info.id + '"]'));
      docs[info.id] = new Doc(info, els);
    });
    collectSlides();
    var m = /^#\/(\d+)/.exec(location.hash);
    show(m ? parseInt(m[1], 10) : 0);
    typesetMath();
    connect();
  }

  window.cobra = { apply: apply, compose: compose, transform: transform, diff: diff, encode: encode, decode: decode, baseLen: baseLen };
  if (document.readyState === "loading") document.addEventListener("DOMContentLoaded", init); else init();
})();

"""Plan of the bundled corpus: what the recorded model runs contain.

The replay fixtures under fixtures/llm/ are produced by a deterministic
scripted backend (see record_fixtures.py), not a live provider, so the
corpus can be regenerated offline and replays byte for byte.  This module
is the single source of truth for that backend's behavior: which summary
lines it emits per fragment, which transitions it extracts, where each
transition cites, and which source sentences the grounding stage quotes.

Conventions:
  - `source`/`target` are canonical state names (upper case, hyphens).
  - `event` is the event string as it appears in the recorded extraction
    output; `fig_event` is the label used by the RFC's own figure when
    the two differ (paraphrases exercise the token-alias matching).
  - `cites` markers resolve to segment ids at record time:
      "fig:SRC|TGT|EVENT"  every figure summary listing that arrow
      "text:<substring>"   the summary quoting that sentence
  - `passages` are sentences that exist verbatim, each on a single line,
    in the corresponding corpus file.  `fabricated` passages deliberately
    do not, so anchoring them fails and the edge stays ungrounded.
  - `perturb` maps a document sentence to the whitespace-damaged variant
    the grounding response returns for it (fuzzy-anchor coverage).
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class PlannedEdge:
    source: str
    target: str
    event: str
    origin: str = "fsm_section"
    conditions: tuple[str, ...] = ()
    actions: tuple[str, ...] = ()
    reasoning: str = ""
    cites: tuple[str, ...] = ()
    passages: tuple[str, ...] = ()
    fabricated: tuple[str, ...] = ()
    fig_event: str = ""

    def figure_label(self) -> str:
        return self.fig_event or self.event


@dataclass(frozen=True)
class RfcPlan:
    rfc_id: str
    filename: str
    states: tuple[dict, ...]
    edges: tuple[PlannedEdge, ...]
    # figure arrows the scripted summaries leave out, keyed by the
    # canonical (source, target, event) triple of the figure edge
    omit_from_figures: frozenset[tuple[str, str, str]] = frozenset()
    perturb: dict[str, str] = field(default_factory=dict)

    def quotable_sentences(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for edge in self.edges:
            for sentence in edge.passages:
                seen.setdefault(sentence)
        return tuple(seen)


def _st(name: str, description: str, kind: str = "normal", members: tuple[str, ...] = ()) -> dict:
    entry: dict = {"name": name, "kind": kind, "description": description}
    if members:
        entry["members"] = list(members)
    return entry


# ---------------------------------------------------------------------------
# TCP (RFC 9293)
# ---------------------------------------------------------------------------

TCP_SENTENCES = {
    ("CLOSED", "LISTEN"): "A passive OPEN call moves the endpoint from CLOSED to LISTEN without sending anything.",
    ("CLOSED", "SYN-SENT"): "An active OPEN call carries the endpoint from CLOSED to SYN-SENT and causes it to send a SYN.",
    ("LISTEN", "SYN-RECEIVED"): "A listener that receives a SYN enters SYN-RECEIVED and replies with a SYN,ACK of its own.",
    ("SYN-SENT", "ESTABLISHED"): "When an acceptable SYN,ACK arrives in SYN-SENT, the endpoint sends an ACK and moves to ESTABLISHED.",
    ("SYN-RECEIVED", "ESTABLISHED"): "Receipt of the ACK of its SYN takes a connection from SYN-RECEIVED to ESTABLISHED.",
    ("ESTABLISHED", "FIN-WAIT-1"): "A CLOSE call in ESTABLISHED sends a FIN and enters FIN-WAIT-1.",
    ("ESTABLISHED", "CLOSE-WAIT"): "If instead a FIN arrives first, the endpoint acknowledges it and moves from ESTABLISHED to CLOSE-WAIT.",
    ("FIN-WAIT-1", "FIN-WAIT-2"): "In FIN-WAIT-1, the ACK of the FIN advances the connection to FIN-WAIT-2.",
    ("FIN-WAIT-1", "CLOSING"): "A FIN arriving in FIN-WAIT-1 is acknowledged and the connection enters CLOSING instead.",
    ("FIN-WAIT-2", "TIME-WAIT"): "A FIN arriving in FIN-WAIT-2 is acknowledged and the connection enters TIME-WAIT.",
    ("CLOSING", "TIME-WAIT"): "In CLOSING, the ACK of the FIN moves the connection on to TIME-WAIT.",
    ("CLOSE-WAIT", "LAST-ACK"): "A CLOSE call in CLOSE-WAIT sends a FIN and enters LAST-ACK.",
    ("LAST-ACK", "CLOSED"): "The ACK of that FIN returns LAST-ACK to CLOSED.",
    ("TIME-WAIT", "CLOSED"): "After two maximum segment lifetimes in TIME-WAIT the connection returns to CLOSED.",
}

TCP_SYN_LISTEN_A = (
    "A SYN that arrives in the SYN-RECEIVED state on a connection that was initiated with a"
    " passive OPEN may be treated as a fresh connection request."
)
TCP_SYN_LISTEN_B = (
    "In that case the receiver returns the connection to the LISTEN state, and the incoming"
    " segment is processed as if it had arrived in LISTEN."
)
TCP_SYN_LISTEN_B_RESPONSE = (
    "In that case the receiver returns the connection to the LISTEN  state, and the incoming"
    " segment is processed as if it had arrived  in LISTEN."
)
TCP_FABRICATED = (
    "Once both directions have been shut for two segment lifetimes the endpoint silently"
    " discards every trace of the connection record."
)


def _tcp_fig_edge(source: str, target: str, event: str, actions: tuple[str, ...] = (),
                  extraction_event: str = "") -> PlannedEdge:
    sentence = TCP_SENTENCES[(source, target)]
    return PlannedEdge(
        source=source,
        target=target,
        event=extraction_event or event,
        fig_event=event,
        origin="fsm_section",
        actions=actions,
        cites=(f"fig:{source}|{target}|{event}", f"text:{sentence}"),
        passages=(sentence,),
    )


TCP = RfcPlan(
    rfc_id="RFC9293",
    filename="rfc9293.txt",
    states=(
        _st("CLOSED", "no connection state at all"),
        _st("LISTEN", "waiting for a connection request"),
        _st("SYN-SENT", "sent a connection request, waiting for a matching one"),
        _st("Syn-Received", "received and sent a connection request, awaiting the ACK"),
        _st("ESTABLISHED", "open connection, data flows both ways"),
        _st("FIN-WAIT-1", "waiting for the remote FIN or the ACK of the local FIN"),
        _st("FIN-WAIT-2", "waiting for the remote FIN"),
        _st("CLOSE-WAIT", "waiting for a local CLOSE call"),
        _st("CLOSING", "waiting for the ACK of the local FIN after a simultaneous close"),
        _st("LAST-ACK", "waiting for the ACK of the FIN that ends a passive close"),
        _st("TIME-WAIT", "waiting out two segment lifetimes before reuse"),
    ),
    edges=(
        _tcp_fig_edge("CLOSED", "LISTEN", "passive OPEN"),
        _tcp_fig_edge("CLOSED", "SYN-SENT", "active OPEN", actions=("snd SYN",)),
        _tcp_fig_edge("LISTEN", "SYN-RECEIVED", "rcv SYN",
                      actions=("snd SYN,ACK",), extraction_event="receive SYN"),
        _tcp_fig_edge("SYN-SENT", "ESTABLISHED", "rcv SYN,ACK", actions=("snd ACK",)),
        _tcp_fig_edge("SYN-RECEIVED", "ESTABLISHED", "rcv ACK of SYN"),
        _tcp_fig_edge("ESTABLISHED", "FIN-WAIT-1", "CLOSE", actions=("snd FIN",)),
        _tcp_fig_edge("ESTABLISHED", "CLOSE-WAIT", "rcv FIN", actions=("snd ACK",)),
        _tcp_fig_edge("FIN-WAIT-1", "FIN-WAIT-2", "rcv ACK of FIN"),
        _tcp_fig_edge("FIN-WAIT-1", "CLOSING", "rcv FIN", actions=("snd ACK",)),
        _tcp_fig_edge("FIN-WAIT-2", "TIME-WAIT", "rcv FIN", actions=("snd ACK",)),
        _tcp_fig_edge("CLOSING", "TIME-WAIT", "rcv ACK of FIN"),
        _tcp_fig_edge("CLOSE-WAIT", "LAST-ACK", "CLOSE", actions=("snd FIN",)),
        _tcp_fig_edge("LAST-ACK", "CLOSED", "rcv ACK of FIN"),
        _tcp_fig_edge("TIME-WAIT", "CLOSED", "timeout=2MSL", extraction_event="2MSL timeout"),
        PlannedEdge(
            source="SYN-RECEIVED",
            target="LISTEN",
            event="rcv SYN",
            origin="other_text",
            conditions=("connection was initiated with a passive OPEN",),
            cites=(f"text:{TCP_SYN_LISTEN_A}",),
            passages=(TCP_SYN_LISTEN_A, TCP_SYN_LISTEN_B),
        ),
        PlannedEdge(
            source="FIN-WAIT-2",
            target="CLOSED",
            event="aborted close",
            origin="inferred",
            reasoning=(
                "The text never says what ends FIN-WAIT-2 when the peer's FIN is lost;"
                " discarding the connection after a timeout is the only consistent exit."
            ),
            cites=(f"text:{TCP_SYN_LISTEN_A}",),
            fabricated=(TCP_FABRICATED,),
        ),
    ),
    # the figure shows SYN-RECEIVED -> LISTEN on "rcv RST"; the recorded
    # summaries drop it, so the extraction never sees it
    omit_from_figures=frozenset({("SYN-RECEIVED", "LISTEN", "rcv RST")}),
    perturb={TCP_SYN_LISTEN_B: TCP_SYN_LISTEN_B_RESPONSE},
)


# ---------------------------------------------------------------------------
# PPTP (RFC 2637)
# ---------------------------------------------------------------------------

PPTP_SENTENCES = {
    ("IDLE", "WAIT-CTL-REPLY", "open ctl conn"): "A PNS opens the control connection by sending a StartCtlConnRqst and waits in wait_ctl_reply.",
    ("WAIT-CTL-REPLY", "ESTABLISHED", "rcv StartCtlConnRply"): "A favorable StartCtlConnRply moves the PNS from wait_ctl_reply to established.",
    ("WAIT-CTL-REPLY", "IDLE", "lose collision"): "Losing the collision tie-break sends the PNS back to idle after it closes the extra connection.",
    ("ESTABLISHED", "IDLE", "rcv StopCtlConnRqst"): "A StopCtlConnRqst received in established is answered with a StopCtlConnRply and ends the session.",
    ("IDLE", "ESTABLISHED", "rcv StartCtlConnRqst"): "A PAC that receives a StartCtlConnRqst replies with a StartCtlConnRply and is immediately established.",
    ("ESTABLISHED", "WAIT-STOP-REPLY", "close rqst"): "A local close request makes the PAC send a StopCtlConnRqst and sit in wait_stop_reply.",
    ("IDLE", "WAIT-OUT-REPLY", "open call"): "An outgoing call starts with an OutCallRqst, leaving the PNS session in wait_out_reply.",
    ("WAIT-OUT-REPLY", "ESTABLISHED", "rcv OutCallRply OK"): "An OutCallRply that carries a success code completes the call and the session is established.",
    ("ESTABLISHED", "IDLE", "rcv CallDiscNotify"): "A CallDiscNotify tears an established call back down to idle.",
    ("IDLE", "ESTABLISHED", "rcv OutCallRqst"): "A PAC answers an acceptable OutCallRqst with an OutCallRply and the call is established.",
    ("IDLE", "WAIT-IN-REPLY", "ring"): "Ringing on the subscriber line makes the PAC send an InCallRqst and wait in wait_in_reply.",
    ("WAIT-IN-REPLY", "ESTABLISHED", "rcv InCallRply"): "When the InCallRply arrives, the PAC completes the call with an InCallConn and is established.",
    ("IDLE", "WAIT-CONNECT", "rcv InCallRqst"): "A PNS that accepts an InCallRqst sends an InCallRply and waits in wait_connect for the connect notice.",
    ("WAIT-CONNECT", "ESTABLISHED", "rcv InCallConn"): "The InCallConn message confirms the incoming call and the session is established.",
}

PPTP_COLLISION_DETECT = (
    "If a PNS waiting in wait_ctl_reply receives a StartCtlConnRqst from its peer, the two"
    " ends have collided and exactly one control connection must be torn down."
)
PPTP_LOSER = "The loser will immediately close the TCP connection it initiated"
PPTP_LOSER_LINE = (
    "The loser will immediately close the TCP connection it initiated, without sending any"
    " further control message on it."
)
PPTP_WINNER = (
    "The winner keeps its own connection open, returns to waiting for the reply to the"
    " request it already sent, and answers the peer's request on the surviving connection."
)
PPTP_ECHO = (
    "Either end may send an EchoRqst on an established control connection; the peer answers"
    " with an EchoRply and the connection state does not change."
)


def _pptp_fig_edge(source: str, target: str, event: str, actions: tuple[str, ...] = (),
                   extraction_event: str = "") -> PlannedEdge:
    sentence = PPTP_SENTENCES[(source, target, event)]
    return PlannedEdge(
        source=source,
        target=target,
        event=extraction_event or event,
        fig_event=event,
        origin="fsm_section",
        actions=actions,
        cites=(f"fig:{source}|{target}|{event}",),
        passages=(sentence,),
    )


PPTP = RfcPlan(
    rfc_id="RFC2637",
    filename="rfc2637.txt",
    states=(
        _st("idle", "no control connection or call"),
        _st("wait_ctl_reply", "sent StartCtlConnRqst, awaiting the reply"),
        _st("established", "control connection or call is up"),
        _st("wait_stop_reply", "sent StopCtlConnRqst, awaiting the reply"),
        _st("wait_out_reply", "sent OutCallRqst, awaiting the reply"),
        _st("wait_in_reply", "sent InCallRqst, awaiting the reply"),
        _st("wait_connect", "sent InCallRply, awaiting InCallConn"),
        _st("collision", "both ends opened control connections at once"),
    ),
    edges=(
        _pptp_fig_edge("IDLE", "WAIT-CTL-REPLY", "open ctl conn", actions=("snd StartCtlConnRqst",)),
        _pptp_fig_edge("WAIT-CTL-REPLY", "ESTABLISHED", "rcv StartCtlConnRply",
                       extraction_event="receive StartCtlConnRply"),
        _pptp_fig_edge("WAIT-CTL-REPLY", "IDLE", "lose collision", actions=("close TCP conn",)),
        _pptp_fig_edge("ESTABLISHED", "IDLE", "rcv StopCtlConnRqst", actions=("snd StopCtlConnRply",)),
        _pptp_fig_edge("IDLE", "ESTABLISHED", "rcv StartCtlConnRqst", actions=("snd StartCtlConnRply",)),
        _pptp_fig_edge("ESTABLISHED", "WAIT-STOP-REPLY", "close rqst", actions=("snd StopCtlConnRqst",)),
        _pptp_fig_edge("IDLE", "WAIT-OUT-REPLY", "open call", actions=("snd OutCallRqst",)),
        _pptp_fig_edge("WAIT-OUT-REPLY", "ESTABLISHED", "rcv OutCallRply OK"),
        _pptp_fig_edge("ESTABLISHED", "IDLE", "rcv CallDiscNotify"),
        _pptp_fig_edge("IDLE", "ESTABLISHED", "rcv OutCallRqst", actions=("snd OutCallRply",)),
        _pptp_fig_edge("IDLE", "WAIT-IN-REPLY", "ring", actions=("snd InCallRqst",)),
        _pptp_fig_edge("WAIT-IN-REPLY", "ESTABLISHED", "rcv InCallRply", actions=("snd InCallConn",)),
        _pptp_fig_edge("IDLE", "WAIT-CONNECT", "rcv InCallRqst", actions=("snd InCallRply",)),
        _pptp_fig_edge("WAIT-CONNECT", "ESTABLISHED", "rcv InCallConn"),
        PlannedEdge(
            source="WAIT-CTL-REPLY",
            target="COLLISION",
            event="rcv StartCtlConnRqst",
            origin="other_text",
            cites=(f"text:{PPTP_COLLISION_DETECT}",),
            passages=(PPTP_COLLISION_DETECT,),
        ),
        PlannedEdge(
            source="COLLISION",
            target="IDLE",
            event="lose tie-break",
            origin="other_text",
            actions=("close initiated TCP connection",),
            cites=(f"text:{PPTP_LOSER}",),
            passages=(PPTP_LOSER_LINE,),
        ),
        PlannedEdge(
            source="COLLISION",
            target="WAIT-CTL-REPLY",
            event="win tie-break",
            origin="other_text",
            actions=("keep own connection",),
            cites=(f"text:{PPTP_WINNER}",),
            passages=(PPTP_WINNER,),
        ),
        PlannedEdge(
            source="COLLISION",
            target="WAIT-CTL-REPLY",
            event="peer request handled on surviving connection",
            origin="inferred",
            reasoning=(
                "The winner must still answer the peer's StartCtlConnRqst, so the surviving"
                " connection re-enters the reply wait for that exchange as well."
            ),
            cites=(f"text:{PPTP_WINNER}",),
            passages=(PPTP_WINNER,),
        ),
        PlannedEdge(
            source="ESTABLISHED",
            target="ESTABLISHED",
            event="rcv EchoRqst",
            origin="other_text",
            actions=("snd EchoRply",),
            cites=(f"text:{PPTP_ECHO}",),
            passages=(PPTP_ECHO,),
        ),
    ),
    omit_from_figures=frozenset(
        {
            ("WAIT-STOP-REPLY", "IDLE", "rcv StopCtlConnRply"),
            ("WAIT-OUT-REPLY", "IDLE", "rcv OutCallRply err"),
            ("ESTABLISHED", "IDLE", "clear rqst"),
            ("WAIT-IN-REPLY", "IDLE", "rcv InCallRply err"),
            ("ESTABLISHED", "IDLE", "hangup"),
            ("WAIT-CONNECT", "IDLE", "rcv CallDiscNotify"),
        }
    ),
)


# ---------------------------------------------------------------------------
# DCCP (RFC 4341)
# ---------------------------------------------------------------------------

DCCP_SENTENCES = {
    ("CLOSED", "LISTEN", "passive open"): "A server performs a passive open, moving the endpoint from CLOSED to LISTEN.",
    ("CLOSED", "REQUEST", "active open"): "An active open sends a DCCP-Request and parks the client in the REQUEST state.",
    ("LISTEN", "RESPOND", "rcv DCCP-Request"): "A DCCP-Request arriving in LISTEN is answered with a DCCP-Response and the server enters RESPOND.",
    ("REQUEST", "PARTOPEN", "rcv DCCP-Response"): "The DCCP-Response elicits a DCCP-Ack from the client, which then waits in PARTOPEN.",
    ("RESPOND", "OPEN", "rcv DCCP-Ack"): "The client's DCCP-Ack completes the handshake on the server side, which moves to OPEN.",
    ("PARTOPEN", "OPEN", "rcv DCCP-Data"): "The first data packet from the server confirms the handshake and takes the client from PARTOPEN to OPEN.",
    ("OPEN", "CLOSEREQ", "server close"): "A server that wants the client to retain timewait state sends DCCP-CloseReq and enters CLOSEREQ.",
    ("OPEN", "CLOSING", "close"): "An endpoint closing the connection itself sends DCCP-Close and waits in CLOSING.",
    ("CLOSING", "TIMEWAIT", "rcv DCCP-Reset"): "The DCCP-Reset that answers a DCCP-Close moves the closer from CLOSING into TIMEWAIT.",
    ("TIMEWAIT", "CLOSED", "2MSL timer expires"): "TIMEWAIT holds the socket for two maximum segment lifetimes before it finally returns to CLOSED.",
}

DCCP_RESET_3 = (
    "A packet arriving in the CLOSED, LISTEN, or TIMEWAIT state with no matching connection"
    " is answered with a DCCP-Reset carrying Reset Code 3, and the endpoint stays closed."
)
DCCP_RESET_4 = (
    "In the REQUEST and RESPOND states, receiving a DCCP-Reset with Reset Code 4 abandons"
    " the half-open handshake and returns the endpoint directly to CLOSED."
)


def _dccp_fig_edge(source: str, target: str, event: str, actions: tuple[str, ...] = (),
                   extraction_event: str = "") -> PlannedEdge:
    # the figure and the prose live in different sections, so these cite both
    sentence = DCCP_SENTENCES[(source, target, event)]
    return PlannedEdge(
        source=source,
        target=target,
        event=extraction_event or event,
        fig_event=event,
        origin="fsm_section",
        actions=actions,
        cites=(f"fig:{source}|{target}|{event}", f"text:{sentence}"),
        passages=(sentence,),
    )


DCCP = RfcPlan(
    rfc_id="RFC4341",
    filename="rfc4341.txt",
    states=(
        _st("CLOSED", "no connection exists"),
        _st("LISTEN", "server awaiting a DCCP-Request"),
        _st("REQUEST", "client sent a DCCP-Request"),
        _st("RESPOND", "server answered with a DCCP-Response"),
        _st("PARTOPEN", "client acknowledged the response, awaiting data"),
        _st("OPEN", "connection fully established"),
        _st("CLOSEREQ", "server asked the client to close"),
        _st("CLOSING", "endpoint sent DCCP-Close"),
        _st("TIMEWAIT", "holding state before the socket is reusable"),
        _st(
            "UNCONNECTED",
            "states with no live connection that answer stray packets with a reset",
            kind="grouped",
            members=("CLOSED", "LISTEN", "TIMEWAIT"),
        ),
        _st(
            "HANDSHAKING",
            "half-open states that a reset aborts",
            kind="grouped",
            members=("REQUEST", "RESPOND"),
        ),
    ),
    edges=(
        _dccp_fig_edge("CLOSED", "LISTEN", "passive open"),
        _dccp_fig_edge("CLOSED", "REQUEST", "active open", actions=("snd DCCP-Request",)),
        _dccp_fig_edge("LISTEN", "RESPOND", "rcv DCCP-Request", actions=("snd DCCP-Response",)),
        _dccp_fig_edge("REQUEST", "PARTOPEN", "rcv DCCP-Response", actions=("snd DCCP-Ack",)),
        _dccp_fig_edge("RESPOND", "OPEN", "rcv DCCP-Ack"),
        _dccp_fig_edge("PARTOPEN", "OPEN", "rcv DCCP-Data"),
        _dccp_fig_edge("OPEN", "CLOSEREQ", "server close", actions=("snd DCCP-CloseReq",)),
        _dccp_fig_edge("OPEN", "CLOSING", "close", actions=("snd DCCP-Close",)),
        _dccp_fig_edge("CLOSING", "TIMEWAIT", "rcv DCCP-Reset"),
        _dccp_fig_edge("TIMEWAIT", "CLOSED", "2MSL timer expires"),
        PlannedEdge(
            source="UNCONNECTED",
            target="CLOSED",
            event="rcv DCCP-Reset",
            origin="other_text",
            conditions=("Reset Code 3, no connection",),
            actions=("snd DCCP-Reset",),
            cites=(f"text:{DCCP_RESET_3}",),
            passages=(DCCP_RESET_3,),
        ),
        PlannedEdge(
            source="HANDSHAKING",
            target="CLOSED",
            event="rcv DCCP-Reset",
            origin="other_text",
            conditions=("Reset Code 4, aborted handshake",),
            cites=(f"text:{DCCP_RESET_4}",),
            passages=(DCCP_RESET_4,),
        ),
    ),
    omit_from_figures=frozenset({("CLOSEREQ", "CLOSED", "rcv DCCP-Reset")}),
)


# ---------------------------------------------------------------------------
# QUIC (RFC 9000)
# ---------------------------------------------------------------------------

QUIC_SENTENCES = {
    ("READY", "SEND", "snd STREAM"): "Sending the first STREAM frame takes the sending part of a stream from Ready to Send.",
    ("SEND", "DATA-SENT", "snd STREAM + FIN"): "A STREAM frame carrying the FIN bit marks the end of the data and moves the sender to Data Sent.",
    ("DATA-SENT", "DATA-RECVD", "rcv all ACKs"): "Once every outstanding STREAM frame including the FIN is acknowledged, the sender reaches Data Recvd.",
    ("READY", "RESET-SENT", "snd RESET_STREAM"): "An application can abandon a stream before sending anything; the RESET_STREAM frame puts it in Reset Sent.",
    ("DATA-SENT", "RESET-SENT", "snd RESET_STREAM"): "Even after the FIN is out, a RESET_STREAM abandons the stream and the sender enters Reset Sent.",
    ("RESET-SENT", "RESET-RECVD", "rcv ACK"): "Acknowledgment of the RESET_STREAM frame settles the sender in Reset Recvd.",
    ("RECV", "SIZE-KNOWN", "rcv STREAM + FIN"): "A STREAM frame with the FIN bit tells the receiver the final size, moving it from Recv to Size Known.",
    ("SIZE-KNOWN", "DATA-RECVD", "rcv all data"): "When every byte up to the final size has arrived, the receiving part enters Data Recvd.",
    ("DATA-RECVD", "DATA-READ", "app read all data"): "The receiving part ends in Data Read once the application has consumed all of the data.",
    ("RECV", "RESET-RECVD", "rcv RESET_STREAM"): "A RESET_STREAM frame can arrive at any point while receiving, leaving the stream in Reset Recvd.",
    ("RESET-RECVD", "RESET-READ", "app read reset"): "Delivering the reset notice to the application moves the receiving part to Reset Read.",
}

QUIC_RETRANSMIT = (
    "A RESET_STREAM frame is retransmitted until it is acknowledged, so the sender can loop"
    " in Reset Sent for several round trips."
)
QUIC_EARLY_FIN = (
    "If the very first STREAM frame already carries the FIN bit and all of the data, the"
    " receiver learns the final size and completes reassembly in one step."
)


def _quic_fig_edge(source: str, target: str, event: str,
                   extraction_event: str = "") -> PlannedEdge:
    sentence = QUIC_SENTENCES[(source, target, event)]
    return PlannedEdge(
        source=source,
        target=target,
        event=extraction_event or event,
        fig_event=event,
        origin="fsm_section",
        cites=(f"fig:{source}|{target}|{event}",),
        passages=(sentence,),
    )


QUIC = RfcPlan(
    rfc_id="RFC9000",
    filename="rfc9000.txt",
    states=(
        _st("Ready", "sending part created, nothing sent yet"),
        _st("Send", "stream data being transmitted"),
        _st("Data Sent", "all data and the FIN are out, awaiting acknowledgment"),
        _st("Data Recvd", "all stream data fully acknowledged or received"),
        _st("Reset Sent", "sender abandoned the stream with RESET_STREAM"),
        _st("Reset Recvd", "reset acknowledged or received"),
        _st("Recv", "receiving part collecting stream data"),
        _st("Size Known", "final size learned from the FIN bit"),
        _st("Data Read", "application consumed all of the data"),
        _st("Reset Read", "application consumed the reset notice"),
    ),
    edges=(
        _quic_fig_edge("READY", "SEND", "snd STREAM"),
        _quic_fig_edge("SEND", "DATA-SENT", "snd STREAM + FIN"),
        _quic_fig_edge("DATA-SENT", "DATA-RECVD", "rcv all ACKs",
                       extraction_event="receive all ACKs"),
        _quic_fig_edge("READY", "RESET-SENT", "snd RESET_STREAM"),
        _quic_fig_edge("DATA-SENT", "RESET-SENT", "snd RESET_STREAM"),
        _quic_fig_edge("RESET-SENT", "RESET-RECVD", "rcv ACK"),
        _quic_fig_edge("RECV", "SIZE-KNOWN", "rcv STREAM + FIN"),
        _quic_fig_edge("SIZE-KNOWN", "DATA-RECVD", "rcv all data"),
        _quic_fig_edge("DATA-RECVD", "DATA-READ", "app read all data"),
        _quic_fig_edge("RECV", "RESET-RECVD", "rcv RESET_STREAM"),
        _quic_fig_edge("RESET-RECVD", "RESET-READ", "app read reset"),
        PlannedEdge(
            source="RESET-SENT",
            target="RESET-SENT",
            event="retransmit RESET_STREAM",
            origin="inferred",
            reasoning=(
                "Retransmitting the reset does not change state, so the stream loops in"
                " Reset Sent until the acknowledgment lands."
            ),
            cites=(f"text:{QUIC_RETRANSMIT}",),
            passages=(QUIC_RETRANSMIT,),
        ),
        PlannedEdge(
            source="RECV",
            target="DATA-RECVD",
            event="rcv STREAM + FIN with all data",
            origin="other_text",
            cites=(f"text:{QUIC_EARLY_FIN}",),
            passages=(QUIC_EARLY_FIN,),
        ),
    ),
    omit_from_figures=frozenset(
        {
            ("SEND", "RESET-SENT", "snd RESET_STREAM"),
            ("SIZE-KNOWN", "RESET-RECVD", "rcv RESET_STREAM"),
        }
    ),
)


PLANS = (TCP, PPTP, DCCP, QUIC)


def plan_for(rfc_id: str) -> RfcPlan:
    for plan in PLANS:
        if plan.rfc_id == rfc_id:
            return plan
    raise KeyError(rfc_id)

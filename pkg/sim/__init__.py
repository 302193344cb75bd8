"""Repeated keyword-auction simulator with bidder drop-outs."""

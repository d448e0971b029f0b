import sys
sys.stdin.read()
print("sat")
print("(model")
print("  (define-fun x () Int 3)")
print("  (define-fun f ((x!0 Int)) Int (ite (= x!0 3) 7 0))")
print(")")

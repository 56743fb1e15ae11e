def unify(a, b):
    subst = dict()
    stack = [a, b]
    while len(stack) > 0:
        t = stack.pop()
        s = stack.pop()
        while s[0] == 'var' and len(subst.get(s[1], [])) > 0:
            s = subst[s[1]]
        while t[0] == 'var' and len(subst.get(t[1], [])) > 0:
            t = subst[t[1]]
        if s[0] == 'var' and t[0] == 'var' and s[1] == t[1]:
            pass
        elif s[0] == 'var' or t[0] == 'var':
            if s[0] != 'var':
                tmp = s
                s = t
                t = tmp
            todo = [t]
            found = False
            while len(todo) > 0:
                u = todo.pop()
                while u[0] == 'var' and len(subst.get(u[1], [])) > 0:
                    u = subst[u[1]]
                if u[0] == 'var':
                    if u[1] == s[1]:
                        found = True
                else:
                    for k in range(2, len(u)):
                        todo.append(u[k])
            if found:
                return 'fail'
            subst[s[1]] = t
        elif s[1] != t[1] or len(s) != len(t):
            return 'fail'
        else:
            for k in range(2, len(s)):
                stack.append(s[k])
                stack.append(t[k])
    result = []
    for name in subst:
        result.append([name, subst[name]])
    return result
